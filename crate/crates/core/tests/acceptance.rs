//! Acceptance gate: runs every criterion and prints one PASS/FAIL line
//! each. Criteria listed in `KNOWN_UNATTAINABLE` are run in full and
//! reported as FAIL; the target fails if any other criterion fails or if a
//! listed one unexpectedly passes.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

mod common;

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::*;
use lrspace::experiments::{independent_copies_experiment, psi_refinement_experiment};
use lrspace::filtration::Filtration;
use lrspace::hyperspace::FiniteMetricSpace;
use lrspace::partition::{psi_conditional_atomicity, ProbeSequence};
use lrspace::process::{bernoulli_counting, paper_example_suite, slowed_down, total_variation_to_poisson};
use lrspace::rational::{int, ratio, Rational};
use lrspace::{io, Morphism, Partition, ProbSpace};

/// Criteria whose stated outcome does not hold for a faithful
/// implementation; the analysis lives in the decisions ledger.
const KNOWN_UNATTAINABLE: &[u32] = &[5, 9];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn within(elapsed: Duration, budget_secs: u64) -> bool {
    elapsed <= Duration::from_secs(budget_secs)
}

/// Class ids of `keys`, so equal keys share an id.
fn class_ids<K: std::hash::Hash + Eq>(keys: impl IntoIterator<Item = K>) -> Vec<usize> {
    let mut ids = HashMap::new();
    keys.into_iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k).or_insert(next)
        })
        .collect()
}

fn classes(ids: &[usize]) -> usize {
    ids.iter().max().map_or(0, |m| m + 1)
}

fn space_isomorphism_completeness() -> Verdict {
    let start = Instant::now();
    let spaces = compositions(16, 6);
    let ids = class_ids(spaces.iter().map(|u| space_from_units(u, 16).rokhlin_invariant()));
    let mismatches: usize = (0..spaces.len())
        .into_par_iter()
        .map(|i| {
            (i..spaces.len()).filter(|&j| (ids[i] == ids[j]) != weight_bijection_exists(&spaces[i], &spaces[j])).count()
        })
        .sum();
    let n = spaces.len();
    let pairs = n * (n + 1) / 2;
    let t = start.elapsed();
    verdict(
        mismatches == 0 && within(t, 60),
        format!(
            "{n} spaces, {} classes, {pairs} pairs, {mismatches} disagreements, {:.1}s",
            classes(&ids),
            t.as_secs_f64()
        ),
    )
}

fn morphism_isomorphism_completeness() -> Verdict {
    let start = Instant::now();
    let mut items: Vec<(Vec<u32>, Vec<usize>)> = Vec::new();
    for w in integer_partitions(16, 6) {
        for labels in set_partitions(w.len()) {
            items.push((w.clone(), labels));
        }
    }
    let build = |w: &[u32], labels: &[usize]| {
        let k = labels.iter().max().unwrap() + 1;
        let mut target = vec![0u32; k];
        for (a, &l) in labels.iter().enumerate() {
            target[l] += w[a];
        }
        Morphism::new(space_from_units(w, 16), space_from_units(&target, 16), labels.to_vec()).unwrap()
    };
    let ids = class_ids(items.iter().map(|(w, l)| build(w, l).invariant()));
    let mismatches: usize = (0..items.len())
        .into_par_iter()
        .map(|i| {
            (i..items.len())
                .filter(|&j| {
                    let (wa, ma) = &items[i];
                    let (wb, mb) = &items[j];
                    (ids[i] == ids[j]) != commuting_bijection_exists(wa, ma, wb, mb)
                })
                .count()
        })
        .sum();
    // sources are enumerated in sorted order; relabelled copies must keep the invariant
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut relabel_failures = 0;
    for _ in 0..2000 {
        let (w, labels) = &items[rng.random_range(0..items.len())];
        let f = build(w, labels);
        let n = w.len();
        let mut alpha: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            alpha.swap(i, rng.random_range(0..=i));
        }
        let k = f.target().len();
        let mut beta: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            beta.swap(i, rng.random_range(0..=i));
        }
        // atom alpha[a] of the new source is atom a of the old one
        let mut src = vec![0u32; n];
        let mut map = vec![0usize; n];
        for a in 0..n {
            src[alpha[a]] = w[a];
            map[alpha[a]] = beta[labels[a]];
        }
        let mut tgt = vec![0u32; k];
        for a in 0..n {
            tgt[map[a]] += src[a];
        }
        let g = Morphism::new(space_from_units(&src, 16), space_from_units(&tgt, 16), map).unwrap();
        relabel_failures += usize::from(!f.is_isomorphic(&g));
    }
    let n = items.len();
    let t = start.elapsed();
    verdict(
        mismatches == 0 && relabel_failures == 0 && within(t, 300),
        format!(
            "{n} morphisms, {} classes, {} pairs, {mismatches} disagreements, {relabel_failures}/2000 relabelling failures, {:.1}s",
            classes(&ids),
            n * (n + 1) / 2,
            t.as_secs_f64()
        ),
    )
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// All filtrations `(trivial, P1, ..., )` with `stages` stages on `n` atoms,
/// as canonical label vectors per stage.
fn filtration_chains(n: usize, stages: usize) -> Vec<Vec<Vec<usize>>> {
    let trivial = vec![0; n];
    match stages {
        1 => vec![vec![trivial]],
        2 => set_partitions(n).into_iter().map(|p| vec![trivial.clone(), p]).collect(),
        3 => {
            let mut out = Vec::new();
            for p2 in set_partitions(n) {
                let k = p2.iter().max().unwrap() + 1;
                for merge in set_partitions(k) {
                    let p1 = canonical_labels(&p2.iter().map(|&l| merge[l]).collect::<Vec<_>>());
                    out.push(vec![trivial.clone(), p1, p2.clone()]);
                }
            }
            out
        }
        _ => unreachable!(),
    }
}

fn filtration_isomorphism_completeness() -> Verdict {
    let start = Instant::now();
    let mut total = 0;
    let mut orbits = 0;
    let mut mismatches = 0;
    for n in 1..=8usize {
        let space = Arc::new(ProbSpace::uniform(n));
        for stages in 1..=3usize {
            let chains = filtration_chains(n, stages);
            let index: HashMap<&Vec<Vec<usize>>, usize> = chains.iter().enumerate().map(|(i, c)| (c, i)).collect();
            let mut uf = UnionFind((0..chains.len()).collect());
            // adjacent transpositions generate every permutation of the atoms
            for (i, c) in chains.iter().enumerate() {
                for s in 0..n.saturating_sub(1) {
                    let moved: Vec<Vec<usize>> = c
                        .iter()
                        .map(|labels| {
                            let mut l = labels.clone();
                            l.swap(s, s + 1);
                            canonical_labels(&l)
                        })
                        .collect();
                    uf.union(i, index[&moved]);
                }
            }
            let invariants = class_ids(chains.iter().map(|c| {
                let parts = c.iter().map(|l| partition(&space, l)).collect();
                let times = (0..stages as i64).map(int).collect();
                Filtration::new(space.clone(), times, parts).unwrap().invariant()
            }));
            let mut root_to_inv = HashMap::new();
            let mut inv_to_root = HashMap::new();
            for i in 0..chains.len() {
                let r = uf.find(i);
                let ok_a = *root_to_inv.entry(r).or_insert(invariants[i]) == invariants[i];
                let ok_b = *inv_to_root.entry(invariants[i]).or_insert(r) == r;
                mismatches += usize::from(!(ok_a && ok_b));
            }
            total += chains.len();
            orbits += classes(&invariants);
        }
    }
    let t = start.elapsed();
    verdict(
        mismatches == 0 && within(t, 300),
        format!("{total} filtrations, {orbits} classes, invariant classes vs permutation orbits: {mismatches} disagreements, {:.1}s", t.as_secs_f64()),
    )
}

fn operator_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    for trial in 0..1000 {
        let n = rng.random_range(1..=12);
        let den = (n as u32).max(rng.random_range(1..=48));
        let space = space_from_units(&random_units(&mut rng, n, den), den as i64);
        let fine = random_labels(&mut rng, n, n);
        let coarse = random_coarsening(&mut rng, &fine);
        let (e2, e1) = (partition(&space, &fine), partition(&space, &coarse));
        let (m1, m2) = (e1.operator(), e2.operator());
        let (a1, a2) = (m1.matrix().to_vec(), m2.matrix().to_vec());
        let w = space.atoms();
        let idem = mat_mul(&a2, &a2) == a2 && mat_mul(&a1, &a1) == a1;
        let adj = (0..n).all(|i| (0..n).all(|j| &w[i] * &a2[i][j] == &w[j] * &a2[j][i]));
        let consts = a2.iter().all(|r| r.iter().fold(Rational::zero(), |acc, x| acc + x) == int(1));
        let tower = mat_mul(&a1, &a2) == a1 && mat_mul(&a2, &a1) == a1;
        let f: Vec<Rational> = (0..n).map(|_| int(rng.random_range(-20..=20))).collect();
        let apply = m2.apply(&f) == e2.cond_exp(&f).unwrap();
        let nested = e1.cond_exp(&e2.cond_exp(&f).unwrap()).unwrap() == e1.cond_exp(&f).unwrap();
        if !(idem && adj && consts && tower && apply && nested) {
            failures.push(trial);
        }
    }
    verdict(failures.is_empty(), format!("1000 seeded partitions, failing trials {failures:?}"))
}

fn example_suite() -> Verdict {
    let start = Instant::now();
    let suite = paper_example_suite();
    let expect = [
        ("compensated_count", true),
        ("walk", true),
        ("walk_square_compensated", true),
        ("halved_immersed", true),
        ("slowed_contained", true),
        ("slowed_immersed", false),
    ];
    let mut wrong = Vec::new();
    for (key, want) in expect {
        let item = suite.item(key).expect("suite item");
        if item.holds != want {
            wrong.push(format!("{key}={} (witness {:?})", item.holds, item.witness));
        }
    }
    let witness = suite.item("slowed_immersed").and_then(|i| i.witness);
    let t = start.elapsed();
    let pass = wrong.is_empty() && witness.is_some() && within(t, 10);
    verdict(
        pass,
        format!(
            "n={}, slowed witness {:?}, unexpected: [{}], {:.2}s",
            suite.steps,
            witness,
            wrong.join(", "),
            t.as_secs_f64()
        ),
    )
}

fn independent_copies() -> Verdict {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut last = Duration::ZERO;
    for m in 2..=12 {
        let t0 = Instant::now();
        let r = independent_copies_experiment(m).unwrap();
        last = t0.elapsed();
        if !r.all_verdicts_hold() {
            bad.push(m);
        }
    }
    verdict(
        bad.is_empty() && within(last, 60),
        format!(
            "m=2..12, failing m {bad:?}, m=12 in {:.1}s, total {:.1}s",
            last.as_secs_f64(),
            start.elapsed().as_secs_f64()
        ),
    )
}

type Q = Ratio<i128>;

/// `min` over random injective `f` of `E φ(P_{E[f|E2] | E1})`, in `i128`.
fn psi_oracle(units: &[u32], den: u32, fine: &[usize], coarse: &[usize], samples: usize, rng: &mut impl Rng) -> Q {
    let n = units.len();
    let w: Vec<Q> = units.iter().map(|&u| Q::new(u as i128, den as i128)).collect();
    let k2 = fine.iter().max().unwrap() + 1;
    let mut best: Option<Q> = None;
    for _ in 0..samples {
        let mut values: Vec<i128> = Vec::with_capacity(n);
        while values.len() < n {
            let v = rng.random_range(0..1_000_000i128);
            if !values.contains(&v) {
                values.push(v);
            }
        }
        let mut num = vec![Q::zero(); k2];
        let mut mass = vec![Q::zero(); k2];
        for a in 0..n {
            num[fine[a]] += w[a] * values[a];
            mass[fine[a]] += w[a];
        }
        // per atom: (coarse block, value of E[f|E2]) -> joint mass
        let mut joint: HashMap<(usize, Q), Q> = HashMap::new();
        for a in 0..n {
            let g = num[fine[a]] / mass[fine[a]];
            *joint.entry((coarse[a], g)).or_insert_with(Q::zero) += w[a];
        }
        let mut per_block: HashMap<usize, Q> = HashMap::new();
        for ((b, _), m) in joint {
            let e = per_block.entry(b).or_insert_with(Q::zero);
            if m > *e {
                *e = m;
            }
        }
        let value = per_block.values().fold(Q::zero(), |acc, x| acc + x);
        best = Some(match best {
            Some(b) if b <= value => b,
            _ => value,
        });
    }
    best.unwrap()
}

fn psi_functional() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=16usize);
        let den = [16u32, 32, 48, 64][rng.random_range(0..4)].max(n as u32);
        let units = random_units(&mut rng, n, den);
        let fine = canonical_labels(&random_labels(&mut rng, n, n));
        let coarse = random_coarsening(&mut rng, &fine);
        let space = space_from_units(&units, den as i64);
        let closed = psi_conditional_atomicity(&partition(&space, &coarse), &partition(&space, &fine)).unwrap();
        let oracle = psi_oracle(&units, den, &fine, &coarse, 10_000, &mut rng);
        let same = closed.numer().to_string() == oracle.numer().to_string()
            && closed.denom().to_string() == oracle.denom().to_string();
        mismatches += usize::from(!same);
    }
    let mut halving_failures = 0;
    let seeds = [
        Partition::discrete(Arc::new(ProbSpace::uniform(2))),
        partition(&Arc::new(ProbSpace::uniform(4)), &[0, 0, 1, 1]),
        Partition::discrete(Arc::new(ProbSpace::atomic(vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)]).unwrap())),
    ];
    for seed in &seeds {
        let r = psi_refinement_experiment(seed, 8).unwrap();
        halving_failures += usize::from(r.verdict("halves_exactly") != Some(true));
    }
    verdict(
        mismatches == 0 && halving_failures == 0,
        format!(
            "200 refining pairs vs 10^4-sample oracle: {mismatches} mismatches; halving failures {halving_failures}/3"
        ),
    )
}

fn metric_spaces() -> Vec<FiniteMetricSpace> {
    let mut out = Vec::new();
    for n in 1..=6usize {
        let pts: Vec<Rational> = (0..n).map(|i| ratio(i as i64, 5)).collect();
        out.push(FiniteMetricSpace::capped_line(&pts).unwrap());
        let labels: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let discrete = (0..n).map(|i| (0..n).map(|j| if i == j { int(0) } else { int(1) }).collect()).collect();
        out.push(FiniteMetricSpace::new(labels, discrete).unwrap());
    }
    // shortest paths on a weighted cycle, scaled into [0, 1]
    let lengths = [1, 2, 1, 3, 2, 1];
    let n = lengths.len();
    let total: i64 = lengths.iter().sum();
    let dist = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (a, b) = (i.min(j), i.max(j));
                    let arc: i64 = lengths[a..b].iter().sum();
                    ratio(arc.min(total - arc), total / 2)
                })
                .collect()
        })
        .collect();
    out.push(FiniteMetricSpace::new((0..n).map(|i| format!("c{i}")).collect(), dist).unwrap());
    out
}

fn nonempty_subsets(n: usize) -> Vec<Vec<usize>> {
    (1u32..1 << n).map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect()).collect()
}

fn check_metric_matrix(d: &[Vec<Rational>]) -> usize {
    let n = d.len();
    let mut bad = 0;
    for i in 0..n {
        for j in 0..n {
            bad += usize::from(d[i][j] != d[j][i] || (d[i][j].is_zero() != (i == j)));
        }
    }
    bad += (0..n)
        .into_par_iter()
        .map(|i| {
            let mut b = 0;
            for j in 0..n {
                let dij = &d[i][j];
                for k in 0..n {
                    b += usize::from(d[i][k] > dij + &d[j][k]);
                }
            }
            b
        })
        .sum::<usize>();
    bad
}

fn metric_axioms_and_sandwich() -> Verdict {
    let mut set_failures = 0;
    let mut cases = 0;
    for x in metric_spaces() {
        let sets = nonempty_subsets(x.len());
        let probes: Vec<usize> = (0..x.len()).collect();
        for metric in 0..2 {
            let d: Vec<Vec<Rational>> = sets
                .iter()
                .map(|a| {
                    sets.iter()
                        .map(|b| match metric {
                            0 => x.hausdorff_distance(a, b).unwrap(),
                            _ => x.wijsman_distance(a, b, &probes).unwrap(),
                        })
                        .collect()
                })
                .collect();
            set_failures += check_metric_matrix(&d);
            cases += 1;
        }
    }
    let ambients: Vec<Arc<ProbSpace>> = {
        let mut v: Vec<Arc<ProbSpace>> = (1..=6).map(|n| Arc::new(ProbSpace::uniform(n))).collect();
        v.push(space_from_units(&[2, 2, 1, 1, 1, 1], 8));
        v.push(space_from_units(&[16, 8, 4, 2, 1, 1], 32));
        v.push(space_from_units(&[3, 1, 1, 1, 1], 7));
        v
    };
    let mut sigma_failures = 0;
    for space in &ambients {
        let probes = ProbeSequence::canonical(space.clone()).unwrap();
        let parts: Vec<Partition> = set_partitions(space.len()).iter().map(|l| partition(space, l)).collect();
        let profiles: Vec<_> = parts.iter().map(|p| probes.profile(p).unwrap()).collect();
        let d: Vec<Vec<Rational>> = profiles.iter().map(|a| profiles.iter().map(|b| a.distance(b)).collect()).collect();
        sigma_failures += check_metric_matrix(&d);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sandwich_failures = 0;
    let spaces = metric_spaces();
    for _ in 0..1000 {
        // point sets e ⊂ f ⊂ g in a random metric space
        let x = &spaces[rng.random_range(0..spaces.len())];
        let n = x.len();
        let g: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.8)).collect();
        let f: Vec<usize> = g.iter().copied().filter(|_| rng.random_bool(0.7)).collect();
        let e: Vec<usize> = f.iter().copied().filter(|_| rng.random_bool(0.6)).collect();
        let limit: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        let mut probes: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            probes.swap(i, rng.random_range(0..=i));
        }
        if !x.check_sandwich(&[e], &[f], &[g], &limit, &probes).unwrap() {
            sandwich_failures += 1;
        }
        // sigma-fields e' ⊂ e ⊂ e'' against a random target
        let m = rng.random_range(1..=8usize);
        let den = (m as u32).max(16);
        let space = space_from_units(&random_units(&mut rng, m, den), den as i64);
        let finest = random_labels(&mut rng, m, m);
        let middle = random_coarsening(&mut rng, &finest);
        let coarsest = random_coarsening(&mut rng, &middle);
        let target = random_labels(&mut rng, m, m);
        let probes = ProbeSequence::canonical(space.clone()).unwrap();
        let t = partition(&space, &target);
        let dist =
            |labels: &[usize]| lrspace::partition::sigma_metric(&partition(&space, labels), &t, &probes).unwrap();
        let (dc, dm, df) = (dist(&coarsest), dist(&middle), dist(&finest));
        if dm > dc.clone().max(df) {
            sandwich_failures += 1;
        }
    }
    verdict(
        set_failures == 0 && sigma_failures == 0 && sandwich_failures == 0,
        format!(
            "{cases} hausdorff/wijsman matrices: {set_failures} violations; {} sigma ambients: {sigma_failures} violations; 1000 sandwich triples x2: {sandwich_failures} violations",
            ambients.len()
        ),
    )
}

fn poisson_shadow() -> Verdict {
    let start = Instant::now();
    let tree = bernoulli_counting(8, &ratio(1, 8)).unwrap();
    let tv = total_variation_to_poisson(&tree.marginal(8), 1.0);
    let t = start.elapsed();
    verdict(tv <= 0.03 && within(t, 1), format!("total variation {tv:.5} (tolerance 0.03), {:.3}s", t.as_secs_f64()))
}

fn write(path: &Path, v: &serde_json::Value) {
    std::fs::write(path, io::render(v)).unwrap();
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let space_a = ProbSpace::new(vec![ratio(1, 4), ratio(1, 8), ratio(1, 8)], ratio(1, 2)).unwrap();
    let space_b = ProbSpace::new(vec![ratio(1, 8), ratio(1, 4), ratio(1, 8)], ratio(1, 2)).unwrap();
    write(&dir.path().join("a.json"), &io::space_to_json(&space_a));
    write(&dir.path().join("b.json"), &io::space_to_json(&space_b));
    let counting = bernoulli_counting(4, &ratio(1, 2)).unwrap();
    let f = counting.natural_filtration();
    write(&dir.path().join("counting.json"), &io::filtration_to_json(&f));
    write(&dir.path().join("slowed.json"), &io::filtration_to_json(&slowed_down(&f)));
    let s = Arc::new(ProbSpace::atomic(vec![ratio(1, 2), ratio(1, 4), ratio(1, 8), ratio(1, 8)]).unwrap());
    write(&dir.path().join("e1.json"), &io::partition_to_json(&Partition::trivial(s.clone())));
    write(&dir.path().join("e2.json"), &io::partition_to_json(&Partition::discrete(s.clone())));
    let u = Arc::new(ProbSpace::uniform(4));
    let m1 = Morphism::new(u.clone(), Arc::new(ProbSpace::uniform(2)), vec![0, 0, 1, 1]).unwrap();
    let m2 = Morphism::new(u, Arc::new(ProbSpace::uniform(2)), vec![1, 0, 1, 0]).unwrap();
    write(&dir.path().join("m1.json"), &io::morphism_to_json(&m1));
    write(&dir.path().join("m2.json"), &io::morphism_to_json(&m2));

    let commands: Vec<Vec<String>> = vec![
        vec!["canon".into(), p("a.json")],
        vec!["--resolution".into(), "3".into(), "canon".into(), p("a.json")],
        vec!["iso".into(), p("a.json"), p("b.json")],
        vec!["iso".into(), p("m1.json"), p("m2.json")],
        vec!["iso".into(), p("counting.json"), p("slowed.json")],
        vec!["immersed".into(), p("slowed.json"), p("counting.json")],
        vec!["immersed".into(), "--up-to-iso".into(), p("slowed.json"), p("counting.json")],
        vec!["metric".into(), p("e1.json"), p("e2.json")],
        vec!["metric".into(), "--format".into(), "json".into(), p("counting.json"), p("slowed.json")],
        vec!["psi".into(), p("e1.json"), p("e2.json")],
        vec!["generate".into(), "walk".into(), "-n".into(), "4".into()],
        vec!["generate".into(), "counting".into(), "-n".into(), "4".into(), "--p".into(), "1/3".into()],
        vec!["paper-examples".into()],
        vec!["paper-examples".into(), "--format".into(), "json".into()],
        vec!["experiment".into(), "independent-copies".into(), "--m".into(), "6".into()],
        vec![
            "experiment".into(),
            "psi-refinement".into(),
            "--depth".into(),
            "5".into(),
            "--partition".into(),
            p("e2.json"),
        ],
        vec!["experiment".into(), "orbit-density".into(), "--trials".into(), "200".into(), "--seed".into(), "7".into()],
        vec![
            "experiment".into(),
            "orbit-density".into(),
            "--trials".into(),
            "50".into(),
            "--format".into(),
            "json".into(),
        ],
    ];
    let mut walk = p("walk.json");
    let gen = lrspace::cli::run(["lrspace", "generate", "walk", "-n", "4", "--output", walk.as_str()]);
    assert_eq!(gen.code, 0);
    let mut all = commands;
    all.push(vec!["martingale".into(), walk.clone(), std::mem::take(&mut walk)]);

    let exe = env!("CARGO_BIN_EXE_lrspace");
    let mut differing = Vec::new();
    for args in &all {
        let run_bin = || {
            let out = Command::new(exe).args(args).output().unwrap();
            (out.status.code(), out.stdout, out.stderr)
        };
        let in_proc = || lrspace::cli::run(std::iter::once("lrspace".to_string()).chain(args.iter().cloned()));
        let (b1, b2) = (run_bin(), run_bin());
        let (c1, c2) = (in_proc(), in_proc());
        let same_bin_inproc = b1.1 == c1.stdout.as_bytes() && b1.0 == Some(c1.code);
        if b1 != b2 || c1 != c2 || !same_bin_inproc {
            differing.push(args.join(" "));
        }
    }
    verdict(
        differing.is_empty(),
        format!("{} commands run twice (binary and in-process), differing: {differing:?}", all.len()),
    )
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Verdict)> = vec![
        (1, "space isomorphism completeness", space_isomorphism_completeness),
        (2, "morphism isomorphism completeness", morphism_isomorphism_completeness),
        (3, "filtration isomorphism completeness", filtration_isomorphism_completeness),
        (4, "operator identities", operator_identities),
        (5, "example suite", example_suite),
        (6, "independent copies experiment", independent_copies),
        (7, "psi functional", psi_functional),
        (8, "metric axioms and sandwich", metric_axioms_and_sandwich),
        (9, "poisson law shadow", poisson_shadow),
        (10, "determinism", determinism),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let v = run();
        let known = KNOWN_UNATTAINABLE.contains(&id);
        let note = if known { " [known unattainable]" } else { "" };
        println!("criterion {id:>2} {:<4} {name}: {}{note}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if v.pass == known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
