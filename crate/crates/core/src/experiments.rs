//! Automorphism actions on sigma-fields and reproducible convergence
//! experiments: independent coordinates, refinement of the atomicity
//! functional, and orbit density records.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::partition::{
    conditionally_uniform, psi_conditional_atomicity, sigma_metric_terms, Partition, ProbeKind, ProbeSequence,
};
use crate::rational::{dyadic, fmt_decimal, fmt_exact, Rational};
use crate::space::ProbSpace;

/// A weight-preserving permutation of the atoms of a space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automorphism {
    ambient: Arc<ProbSpace>,
    perm: Vec<usize>,
}

impl Automorphism {
    pub fn new(ambient: Arc<ProbSpace>, perm: Vec<usize>) -> Result<Self> {
        ambient.require_atomic()?;
        let n = ambient.len();
        if perm.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: perm.len() });
        }
        let mut seen = vec![false; n];
        for &b in &perm {
            if b >= n || std::mem::replace(&mut seen[b], true) {
                return Err(Error::OutOfRange("permutation entries".into()));
            }
        }
        if perm.iter().enumerate().any(|(a, &b)| ambient.weight(a) != ambient.weight(b)) {
            return Err(Error::NotWeightPreserving);
        }
        Ok(Automorphism { ambient, perm })
    }

    pub fn identity(ambient: Arc<ProbSpace>) -> Self {
        let perm = (0..ambient.len()).collect();
        Automorphism { ambient, perm }
    }

    /// Uniformly random among weight-preserving permutations.
    pub fn random(ambient: Arc<ProbSpace>, rng: &mut impl rand::Rng) -> Self {
        let mut classes: BTreeMap<&Rational, Vec<usize>> = BTreeMap::new();
        for (a, w) in ambient.atoms().iter().enumerate() {
            classes.entry(w).or_default().push(a);
        }
        let mut perm = vec![0; ambient.len()];
        for atoms in classes.values() {
            let mut image = atoms.clone();
            image.shuffle(rng);
            for (&a, &b) in atoms.iter().zip(&image) {
                perm[a] = b;
            }
        }
        Automorphism { ambient, perm }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism> {
        if !self.ambient.same_measure(&other.ambient) {
            return Err(Error::AmbientMismatch);
        }
        let perm = other.perm.iter().map(|&b| self.perm[b]).collect();
        Ok(Automorphism { ambient: self.ambient.clone(), perm })
    }

    pub fn inverse(&self) -> Automorphism {
        let mut perm = vec![0; self.perm.len()];
        for (a, &b) in self.perm.iter().enumerate() {
            perm[b] = a;
        }
        Automorphism { ambient: self.ambient.clone(), perm }
    }

    /// Image partition `g · e`.
    pub fn act(&self, e: &Partition) -> Result<Partition> {
        if !self.ambient.same_measure(e.ambient()) {
            return Err(Error::AmbientMismatch);
        }
        Ok(e.permuted(&self.perm))
    }
}

/// Per-block sorted weight profiles, as a sorted multiset.
fn orbit_key(e: &Partition) -> Vec<Vec<Rational>> {
    let w = e.ambient().atoms();
    let mut key: Vec<Vec<Rational>> = e
        .blocks()
        .iter()
        .map(|b| {
            let mut p: Vec<Rational> = b.iter().map(|&a| w[a].clone()).collect();
            p.sort();
            p
        })
        .collect();
    key.sort();
    key
}

/// Whether some automorphism carries `e1` onto `e2`.
pub fn orbit_equivalent(e1: &Partition, e2: &Partition) -> Result<bool> {
    if !e1.ambient().same_measure(e2.ambient()) {
        return Err(Error::AmbientMismatch);
    }
    Ok(orbit_key(e1) == orbit_key(e2))
}

/// `k` independent copies of `e` on the product of `k` copies of its
/// ambient space; copy `i` is pulled back along coordinate `i`.
pub fn independent_copies(e: &Partition, k: usize) -> Result<(Arc<ProbSpace>, Vec<Partition>)> {
    let base = e.ambient();
    let n = base.len();
    let total =
        n.checked_pow(k as u32).filter(|&t| t <= 1 << 16).ok_or_else(|| Error::OutOfRange("product size".into()))?;
    let mut weights = Vec::with_capacity(total);
    let mut coords = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        let mut c = vec![0; k];
        for slot in c.iter_mut().rev() {
            *slot = rest % n;
            rest /= n;
        }
        weights.push(c.iter().fold(Rational::from_integer(1.into()), |acc, &a| acc * base.weight(a)));
        coords.push(c);
    }
    let space = Arc::new(ProbSpace::atomic(weights)?);
    let copies = (0..k)
        .map(|i| {
            let labels: Vec<usize> = coords.iter().map(|c| e.block_of(c[i])).collect();
            Partition::from_labels(space.clone(), &labels)
        })
        .collect();
    Ok((space, copies))
}

/// One table cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cell {
    Exact(Rational),
    Int(i64),
    Flag(bool),
    Skipped,
}

/// Tabulated output of an experiment: echoed parameters, rows of exact
/// values, and named monotonicity verdicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub verdicts: Vec<(String, bool)>,
}

impl ExperimentReport {
    pub fn verdict(&self, key: &str) -> Option<bool> {
        self.verdicts.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn all_verdicts_hold(&self) -> bool {
        self.verdicts.iter().all(|(_, v)| *v)
    }

    /// Exact values of a column, `None` where skipped.
    pub fn column(&self, name: &str) -> Vec<Option<Rational>> {
        let i = self.columns.iter().position(|c| c == name).expect("known column");
        self.rows
            .iter()
            .map(|r| match &r[i] {
                Cell::Exact(q) => Some(q.clone()),
                Cell::Int(k) => Some(Rational::from_integer((*k).into())),
                _ => None,
            })
            .collect()
    }

    /// Parameter header as `# key=value` lines, then one CSV row per step.
    /// Rational columns expand to `<name>_exact` and `<name>_approx`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# experiment={}", self.name);
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "# {k}={v}");
        }
        for (k, v) in &self.verdicts {
            let _ = writeln!(out, "# verdict.{k}={v}");
        }
        let exact_cols: Vec<bool> =
            (0..self.columns.len()).map(|i| self.rows.iter().any(|r| matches!(r[i], Cell::Exact(_)))).collect();
        let header: Vec<String> = self
            .columns
            .iter()
            .zip(&exact_cols)
            .flat_map(|(c, &ex)| if ex { vec![format!("{c}_exact"), format!("{c}_approx")] } else { vec![c.clone()] })
            .collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&exact_cols)
                .flat_map(|(cell, &ex)| match cell {
                    Cell::Exact(q) => vec![fmt_exact(q), fmt_decimal(q)],
                    Cell::Int(k) => vec![k.to_string()],
                    Cell::Flag(b) => vec![b.to_string()],
                    Cell::Skipped if ex => vec!["skipped".into(), "skipped".into()],
                    Cell::Skipped => vec!["skipped".into()],
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::{json, Map, Value};
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, cell) in self.columns.iter().zip(r) {
                    let v = match cell {
                        Cell::Exact(q) => json!({"exact": fmt_exact(q), "approx": fmt_decimal(q)}),
                        Cell::Int(k) => json!(k),
                        Cell::Flag(b) => json!(b),
                        Cell::Skipped => Value::Null,
                    };
                    m.insert(c.clone(), v);
                }
                Value::Object(m)
            })
            .collect();
        json!({
            "experiment": self.name,
            "parameters": self.parameters.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<Map<_, _>>(),
            "verdicts": self.verdicts.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<Map<_, _>>(),
            "rows": rows,
        })
    }
}

fn non_increasing(xs: &[Rational]) -> bool {
    xs.windows(2).all(|w| w[0] >= w[1])
}

/// Coordinate partition of coin `k` (1-based, most significant first) on
/// the uniform space of `2^m` atoms.
pub fn coordinate_partition(space: &Arc<ProbSpace>, m: u32, k: u32) -> Partition {
    let labels: Vec<usize> = (0..space.len()).map(|a| (a >> (m - k)) & 1).collect();
    Partition::from_labels(space.clone(), &labels)
}

/// On `2^m` fair coins with coordinate sigma-fields `C_k`, tabulates
/// `d(C_k, trivial)` and `d(C_1 × C_k, C_1)` for `k = 1..m`.
pub fn independent_copies_experiment(m: u32) -> Result<ExperimentReport> {
    if !(2..=12).contains(&m) {
        return Err(Error::OutOfRange(format!("coin count {m} (allowed 2..=12)")));
    }
    let space = Arc::new(ProbSpace::uniform(1 << m));
    let probes = ProbeSequence::canonical(space.clone())?;
    let trivial = Partition::trivial(space.clone());
    let first = coordinate_partition(&space, m, 1);
    let shallow = |terms: &[Rational], k: u32| {
        probes.probes().iter().zip(terms).all(|(p, t)| match p.kind() {
            ProbeKind::Cylinder { depth, .. } if depth < k => t.is_zero(),
            _ => true,
        })
    };

    let mut rows = Vec::new();
    let (mut col_a, mut col_b) = (Vec::new(), Vec::new());
    let mut zero_shallow = true;
    for k in 1..=m {
        let ck = coordinate_partition(&space, m, k);
        let terms_a = sigma_metric_terms(&ck, &trivial, &probes)?;
        zero_shallow &= shallow(&terms_a, k);
        let a = terms_a.iter().max().cloned().unwrap_or_else(Rational::zero);
        col_a.push(a.clone());
        let b = match first.product(&ck) {
            Ok(prod) => {
                let terms_b = sigma_metric_terms(&prod, &first, &probes)?;
                zero_shallow &= shallow(&terms_b, k);
                let b = terms_b.iter().max().cloned().unwrap_or_else(Rational::zero);
                col_b.push(b.clone());
                Cell::Exact(b)
            }
            Err(Error::DependentFactors { .. }) => Cell::Skipped,
            Err(e) => return Err(e),
        };
        rows.push(vec![Cell::Int(k as i64), Cell::Exact(a), b]);
    }
    Ok(ExperimentReport {
        name: "independent-copies".into(),
        parameters: vec![("m".into(), m.to_string()), ("probes".into(), "canonical".into())],
        columns: vec!["k".into(), "coordinate_vs_trivial".into(), "product_vs_first".into()],
        rows,
        verdicts: vec![
            ("coordinate_vs_trivial_non_increasing".into(), non_increasing(&col_a)),
            ("product_vs_first_non_increasing".into(), non_increasing(&col_b)),
            ("shallow_probes_contribute_zero".into(), zero_shallow),
        ],
    })
}

/// Splits every block of `seed` uniformly in two, `depth` times, on the
/// product of the ambient with `depth` fair coins, and tabulates
/// `ψ(refined | trivial)` at each step.
pub fn psi_refinement_experiment(seed: &Partition, depth: u32) -> Result<ExperimentReport> {
    if depth > 10 {
        return Err(Error::OutOfRange(format!("depth {depth} (allowed 0..=10)")));
    }
    let base = seed.ambient();
    let pieces = 1usize << depth;
    let piece = dyadic(depth);
    let weights: Vec<Rational> = base.atoms().iter().flat_map(|w| std::iter::repeat_n(w * &piece, pieces)).collect();
    let space = Arc::new(ProbSpace::atomic(weights)?);
    let trivial = Partition::trivial(space.clone());
    let uniform_seed = conditionally_uniform(&Partition::trivial(base.clone()), seed)?;

    let mut values = Vec::new();
    let mut rows = Vec::new();
    for step in 0..=depth {
        let labels: Vec<(usize, usize)> =
            (0..space.len()).map(|a| (seed.block_of(a / pieces), (a % pieces) >> (depth - step))).collect();
        let refined = Partition::from_labels(space.clone(), &labels);
        let psi = psi_conditional_atomicity(&trivial, &refined)?;
        rows.push(vec![Cell::Int(step as i64), Cell::Int(refined.num_blocks() as i64), Cell::Exact(psi.clone())]);
        values.push(psi);
    }
    let two = Rational::from_integer(2.into());
    let halves = values.windows(2).all(|w| &w[1] * &two == w[0]);
    let strict = values.windows(2).all(|w| w[1] < w[0]);
    Ok(ExperimentReport {
        name: "psi-refinement".into(),
        parameters: vec![
            ("depth".into(), depth.to_string()),
            ("seed_blocks".into(), seed.num_blocks().to_string()),
            ("seed_conditionally_uniform".into(), uniform_seed.to_string()),
        ],
        columns: vec!["step".into(), "blocks".into(), "psi".into()],
        rows,
        verdicts: vec![("halves_exactly".into(), halves), ("strictly_decreasing".into(), strict)],
    })
}

/// Generator for trial `trial`: the ChaCha8 stream `trial` of the seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Reference sigma-field for the orbit experiment: the two halves of the
/// atom indices.
pub fn halving(space: &Arc<ProbSpace>) -> Partition {
    let n = space.len();
    let labels: Vec<bool> = (0..n).map(|a| 2 * a >= n).collect();
    Partition::from_labels(space.clone(), &labels)
}

/// Random partition of `space` with labels drawn uniformly from
/// `0..k`, `k` itself uniform in `2..=max_labels`.
pub fn random_partition(space: &Arc<ProbSpace>, max_labels: usize, rng: &mut impl rand::Rng) -> Partition {
    let k = rng.random_range(2..=max_labels.max(2));
    let labels: Vec<usize> = (0..space.len()).map(|_| rng.random_range(0..k)).collect();
    Partition::from_labels(space.clone(), &labels)
}

/// Samples automorphisms `g` and records the running minimum of
/// `d(e ∨ g·e0, e)` with `e0` the halving sigma-field; rows flag whether
/// `e` and `g·e0` were independent (a genuine product).
pub fn orbit_density_experiment(e: &Partition, trials: u64, rng_seed: u64) -> Result<ExperimentReport> {
    let space = e.ambient().clone();
    if !space.is_uniform() {
        return Err(Error::NotUniform);
    }
    let probes = ProbeSequence::canonical(space.clone())?;
    let target = probes.profile(e)?;
    let reference = halving(&space);
    let mut record: Option<Rational> = None;
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for trial in 0..trials {
        let mut rng = trial_rng(rng_seed, trial);
        let g = Automorphism::random(space.clone(), &mut rng);
        let image = g.act(&reference)?;
        let independent = e.independent(&image)?;
        let candidate = e.join(&image)?;
        let d = probes.profile(&candidate)?.distance(&target);
        let best = match record.take() {
            Some(r) if r <= d => r,
            _ => d.clone(),
        };
        records.push(best.clone());
        rows.push(vec![Cell::Int(trial as i64), Cell::Flag(independent), Cell::Exact(d), Cell::Exact(best.clone())]);
        record = Some(best);
    }
    Ok(ExperimentReport {
        name: "orbit-density".into(),
        parameters: vec![
            ("atoms".into(), space.len().to_string()),
            ("trials".into(), trials.to_string()),
            ("seed".into(), rng_seed.to_string()),
            ("generator".into(), "chacha8, stream = trial index".into()),
            ("reference".into(), "halving".into()),
        ],
        columns: vec!["trial".into(), "independent".into(), "distance".into(), "record".into()],
        rows,
        verdicts: vec![("record_non_increasing".into(), non_increasing(&records))],
    })
}
