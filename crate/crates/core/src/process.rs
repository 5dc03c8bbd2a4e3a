//! Finite-step process trees: a Bernoulli counting process and the ±1
//! random walk, their natural filtrations, and the example suite on
//! martingales and (non-)immersion.

use std::fmt::Write as _;
use std::ops::Range;
use std::sync::Arc;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::filtration::{is_immersed, Filtration, FiltrationInvariant};
use crate::partition::Partition;
use crate::rational::{fmt_exact, int, ratio, Rational};
use crate::space::ProbSpace;

/// Largest number of steps a tree may have (65536 paths for binary steps).
pub const MAX_STEPS: usize = 16;

/// A process on the space of outcome paths of `steps` independent steps.
///
/// Path indices are mixed-radix numbers with step 1 as the most
/// significant digit, so the first `t` steps determine a contiguous range
/// of paths.
#[derive(Debug, Clone)]
pub struct ProcessTree {
    branching: Vec<Vec<Rational>>,
    path_space: Arc<ProbSpace>,
    /// `outcomes[a][k]`: outcome index of step `k+1` on path `a`.
    outcomes: Vec<Vec<usize>>,
    values: Vec<Vec<Rational>>,
}

impl ProcessTree {
    /// Builds the tree from per-step outcome distributions and a value
    /// function of the outcome prefix. `value(prefix)` gives `f_t` for a
    /// prefix of length `t`.
    pub fn build(branching: Vec<Vec<Rational>>, mut value: impl FnMut(&[usize]) -> Rational) -> Result<Self> {
        let steps = branching.len();
        if steps == 0 || steps > MAX_STEPS {
            return Err(Error::OutOfRange(format!("step count {steps}")));
        }
        for probs in &branching {
            if probs.iter().any(|p| !p.is_positive()) || !crate::rational::sum(probs).is_one() {
                return Err(Error::InvalidWeight("step distribution".into()));
            }
        }
        let total: usize = branching.iter().map(Vec::len).product();
        let mut outcomes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut path = vec![0usize; steps];
        for _ in 0..total {
            weights.push(path.iter().zip(&branching).fold(Rational::one(), |acc, (&o, p)| acc * &p[o]));
            outcomes.push(path.clone());
            for k in (0..steps).rev() {
                path[k] += 1;
                if path[k] < branching[k].len() {
                    break;
                }
                path[k] = 0;
            }
        }
        let values = (0..=steps).map(|t| outcomes.iter().map(|o| value(&o[..t])).collect()).collect();
        let path_space = Arc::new(ProbSpace::atomic(weights)?);
        Ok(ProcessTree { branching, path_space, outcomes, values })
    }

    pub fn steps(&self) -> usize {
        self.branching.len()
    }

    pub fn branching(&self) -> &[Vec<Rational>] {
        &self.branching
    }

    pub fn path_space(&self) -> &Arc<ProbSpace> {
        &self.path_space
    }

    pub fn outcomes(&self) -> &[Vec<usize>] {
        &self.outcomes
    }

    /// `values()[t][a]` is the value at time `t` on path `a`, `t = 0..=steps`.
    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    /// Same paths, different values.
    pub fn map_values(&self, mut f: impl FnMut(usize, &Rational) -> Rational) -> Vec<Vec<Rational>> {
        self.values.iter().enumerate().map(|(t, v)| v.iter().map(|x| f(t, x)).collect()).collect()
    }

    /// Distribution of the value at time `t`, sorted by value.
    pub fn marginal(&self, t: usize) -> Vec<(Rational, Rational)> {
        let mut pairs: Vec<(Rational, Rational)> = Vec::new();
        for (x, w) in self.values[t].iter().zip(self.path_space.atoms()) {
            match pairs.iter_mut().find(|(v, _)| v == x) {
                Some((_, m)) => *m += w,
                None => pairs.push((x.clone(), w.clone())),
            }
        }
        pairs.sort();
        pairs
    }

    /// Sigma-field generated by the outcomes of steps `range` (0-based).
    pub fn steps_sigma_field(&self, range: Range<usize>) -> Partition {
        let labels: Vec<&[usize]> = self.outcomes.iter().map(|o| &o[range.clone()]).collect();
        Partition::from_labels(self.path_space.clone(), &labels)
    }

    pub fn natural_filtration(&self) -> Filtration {
        natural_filtration_of(self.path_space.clone(), &self.values).expect("f_0 is constant")
    }
}

/// Stage `t` groups paths by the history `(f_0, …, f_t)`. Fails when `f_0`
/// is not constant.
pub fn natural_filtration_of(space: Arc<ProbSpace>, values: &[Vec<Rational>]) -> Result<Filtration> {
    let n = space.len();
    let mut history: Vec<Vec<&Rational>> = vec![Vec::new(); n];
    let mut stages = Vec::with_capacity(values.len());
    for v in values {
        for (a, h) in history.iter_mut().enumerate() {
            h.push(&v[a]);
        }
        stages.push(Partition::from_labels(space.clone(), &history));
    }
    Filtration::from_stages(stages)
}

/// `f_t` = number of successes among the first `t` steps, success
/// probability `p` per step.
pub fn bernoulli_counting(steps: usize, p: &Rational) -> Result<ProcessTree> {
    if !p.is_positive() || *p >= Rational::one() {
        return Err(Error::OutOfRange(format!("success probability {}", fmt_exact(p))));
    }
    if steps == 0 {
        return Err(Error::OutOfRange("step count 0".into()));
    }
    // outcome 0 = failure, 1 = success
    let step = vec![Rational::one() - p, p.clone()];
    ProcessTree::build(vec![step; steps], |prefix| int(prefix.iter().filter(|&&o| o == 1).count() as i64))
}

/// `S_t` = sum of the first `t` fair ±1 steps.
pub fn random_walk(steps: usize) -> Result<ProcessTree> {
    if steps == 0 {
        return Err(Error::OutOfRange("step count 0".into()));
    }
    let step = vec![ratio(1, 2), ratio(1, 2)];
    ProcessTree::build(vec![step; steps], |prefix| {
        int(prefix.iter().map(|&o| if o == 1 { 1 } else { -1 }).sum::<i64>())
    })
}

/// `E_t = F_{⌊t/2⌋}` on the same grid.
pub fn slowed_down(f: &Filtration) -> Filtration {
    let stages = (0..f.len()).map(|t| f.stage(t / 2).clone()).collect();
    Filtration::new(f.ambient().clone(), f.times().to_vec(), stages).expect("slowed chain still refines")
}

/// Total variation distance between a distribution on nonnegative integers
/// and Poisson(`rate`), including the Poisson tail outside the support.
pub fn total_variation_to_poisson(marginal: &[(Rational, Rational)], rate: f64) -> f64 {
    let mut covered = 0.0;
    let mut diff = 0.0;
    for (k, m) in marginal {
        assert!(k.is_integer() && !k.is_negative(), "support must be nonnegative integers");
        let k: u32 = k.to_integer().try_into().expect("small support");
        let pk = poisson_mass(k, rate);
        covered += pk;
        diff += (crate::rational::to_f64(m) - pk).abs();
    }
    0.5 * (diff + (1.0 - covered).max(0.0))
}

pub fn poisson_mass(k: u32, rate: f64) -> f64 {
    let mut m = (-rate).exp();
    for i in 1..=k {
        m *= rate / i as f64;
    }
    m
}

/// One checked statement of the example suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteItem {
    pub key: &'static str,
    pub description: &'static str,
    pub holds: bool,
    /// First violating `(s, t)` when the check fails.
    pub witness: Option<(usize, usize)>,
}

/// Filtration invariants of the counting, halved and slowed filtrations
/// at one grid size, with their pairwise isomorphism verdicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsomorphismRow {
    pub steps: usize,
    pub counting_vs_halved: bool,
    pub counting_vs_slowed: bool,
    pub halved_vs_slowed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExampleSuite {
    pub steps: usize,
    pub p: Rational,
    pub items: Vec<SuiteItem>,
    pub isomorphism: Vec<IsomorphismRow>,
}

impl ExampleSuite {
    pub fn item(&self, key: &str) -> Option<&SuiteItem> {
        self.items.iter().find(|i| i.key == key)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "example suite: n = {}, p = {}", self.steps, fmt_exact(&self.p));
        for item in &self.items {
            let _ =
                write!(out, "  [{}] {:<28} {}", if item.holds { "true " } else { "false" }, item.key, item.description);
            if let Some((s, t)) = item.witness {
                let _ = write!(out, " (first violation at s={s}, t={t})");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "pairwise isomorphism of counting / halved / slowed filtrations:");
        for row in &self.isomorphism {
            let _ = writeln!(
                out,
                "  n={:<2} counting~halved={} counting~slowed={} halved~slowed={}",
                row.steps, row.counting_vs_halved, row.counting_vs_slowed, row.halved_vs_slowed
            );
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        json!({
            "steps": self.steps,
            "p": fmt_exact(&self.p),
            "items": self.items.iter().map(|i| json!({
                "key": i.key,
                "holds": i.holds,
                "witness": i.witness.map(|(s, t)| json!({"s": s, "t": t})),
            })).collect::<Vec<_>>(),
            "isomorphism": self.isomorphism.iter().map(|r| json!({
                "steps": r.steps,
                "counting_vs_halved": r.counting_vs_halved,
                "counting_vs_slowed": r.counting_vs_slowed,
                "halved_vs_slowed": r.halved_vs_slowed,
            })).collect::<Vec<_>>(),
        })
    }
}

pub const SUITE_STEPS: usize = 4;

fn halved_filtration(tree: &ProcessTree) -> Filtration {
    let two = int(2);
    let g = tree.map_values(|_, f| (f / &two).floor());
    natural_filtration_of(tree.path_space().clone(), &g).expect("g_0 = 0")
}

fn martingale_item(
    key: &'static str,
    description: &'static str,
    filtration: &Filtration,
    process: &[Vec<Rational>],
) -> SuiteItem {
    let witness = filtration.martingale_violation(process).expect("suite processes are adapted");
    SuiteItem { key, description, holds: witness.is_none(), witness }
}

/// Counting process with `p = 1/2` and the ±1 walk, both on `n = 4` steps.
pub fn paper_example_suite() -> ExampleSuite {
    let n = SUITE_STEPS;
    let p = ratio(1, 2);
    let counting = bernoulli_counting(n, &p).expect("valid parameters");
    let f = counting.natural_filtration();
    let variance = &p * (Rational::one() - &p);

    let compensated = counting.map_values(|t, x| x - int(t as i64) * &p);
    let compensated_sq = counting.map_values(|t, x| {
        let m = x - int(t as i64) * &p;
        &m * &m - int(t as i64) * &variance
    });

    let g = halved_filtration(&counting);
    let halved = is_immersed(&g, &f).expect("same grid");

    let slowed = slowed_down(&f);
    let contained = slowed.stages().iter().zip(f.stages()).all(|(e, ff)| e.is_coarser_than(ff));
    let slowed_imm = is_immersed(&slowed, &f).expect("same grid");

    let walk = random_walk(n).expect("valid parameters");
    let w = walk.natural_filtration();
    let s_sq = walk.map_values(|t, x| x * x - int(t as i64));
    let s_sq_raw = walk.map_values(|_, x| x * x);

    let items = vec![
        martingale_item("compensated_count", "f_t - t p is a martingale", &f, &compensated),
        martingale_item("compensated_count_square", "(f_t - t p)^2 - t p(1-p) is a martingale", &f, &compensated_sq),
        SuiteItem {
            key: "halved_immersed",
            description: "natural filtration of floor(f_t / 2) is immersed into the counting filtration",
            holds: halved.immersed,
            witness: halved.witness,
        },
        SuiteItem {
            key: "slowed_contained",
            description: "slowed filtration E_t = F_floor(t/2) satisfies E_t ⊂ F_t",
            holds: contained,
            witness: None,
        },
        SuiteItem {
            key: "slowed_immersed",
            description: "slowed filtration is immersed into the counting filtration",
            holds: slowed_imm.immersed,
            witness: slowed_imm.witness,
        },
        martingale_item("walk", "S_t is a martingale", &w, walk.values()),
        martingale_item("walk_square_compensated", "S_t^2 - t is a martingale", &w, &s_sq),
        martingale_item("walk_square", "S_t^2 is a martingale", &w, &s_sq_raw),
    ];

    let isomorphism = [2, 4, 6]
        .into_iter()
        .map(|steps| {
            let tree = bernoulli_counting(steps, &p).expect("valid parameters");
            let f = tree.natural_filtration();
            let (a, b, c): (FiltrationInvariant, FiltrationInvariant, FiltrationInvariant) =
                (f.invariant(), halved_filtration(&tree).invariant(), slowed_down(&f).invariant());
            IsomorphismRow { steps, counting_vs_halved: a == b, counting_vs_slowed: a == c, halved_vs_slowed: b == c }
        })
        .collect();

    ExampleSuite { steps: n, p, items, isomorphism }
}

/// Exact binomial mass `C(n,k) p^k (1-p)^(n-k)`.
pub fn binomial_mass(n: u64, k: u64, p: &Rational) -> Rational {
    let c = num_integer::binomial(num_bigint::BigInt::from(n), num_bigint::BigInt::from(k));
    let q = Rational::one() - p;
    let pow = |x: &Rational, e: u64| (0..e).fold(Rational::one(), |acc, _| acc * x);
    Rational::from_integer(c) * pow(p, k) * pow(&q, n - k)
}
