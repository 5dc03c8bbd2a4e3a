//! Enumeration helpers and brute-force oracles shared by the integration
//! tests. Oracles work on plain integers so they share no arithmetic with
//! the library.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use lrspace::rational::{ratio, Rational};
use lrspace::{Partition, ProbSpace};
use rand::Rng;

/// All set partitions of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, next: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for l in 0..=next {
            cur[i] = l;
            rec(i + 1, next.max(l + 1), cur, out);
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return vec![vec![]];
    }
    rec(0, 0, &mut vec![0; n], &mut out);
    out
}

/// Relabels to a restricted growth string (labels by first appearance).
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let k = map.len();
            *map.entry(*l).or_insert(k)
        })
        .collect()
}

/// Ordered sequences of positive integers summing to `total`.
pub fn compositions(total: u32, max_parts: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, max_parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        if cur.len() == max_parts {
            return;
        }
        for k in 1..=rest {
            cur.push(k);
            rec(rest - k, max_parts, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, max_parts, &mut Vec::new(), &mut out);
    out
}

/// Non-increasing sequences of positive integers summing to `total`.
pub fn integer_partitions(total: u32, max_parts: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, cap: u32, max_parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        if cur.len() == max_parts {
            return;
        }
        for k in (1..=rest.min(cap)).rev() {
            cur.push(k);
            rec(rest - k, k, max_parts, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, total, max_parts, &mut Vec::new(), &mut out);
    out
}

pub fn space_from_units(units: &[u32], den: i64) -> Arc<ProbSpace> {
    Arc::new(ProbSpace::atomic(units.iter().map(|&u| ratio(u as i64, den)).collect()).unwrap())
}

/// Whether a bijection of atoms carries weights `a` onto weights `b`.
pub fn weight_bijection_exists(a: &[u32], b: &[u32]) -> bool {
    fn rec(i: usize, a: &[u32], b: &[u32], used: &mut [bool]) -> bool {
        if i == a.len() {
            return true;
        }
        for j in 0..b.len() {
            if !used[j] && a[i] == b[j] {
                used[j] = true;
                if rec(i + 1, a, b, used) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    a.len() == b.len() && rec(0, a, b, &mut vec![false; b.len()])
}

/// Whether weight-preserving bijections `α` of sources and `β` of targets
/// exist with `β ∘ map_a = map_b ∘ α`.
pub fn commuting_bijection_exists(wa: &[u32], ma: &[usize], wb: &[u32], mb: &[usize]) -> bool {
    let targets = |m: &[usize]| m.iter().max().map_or(0, |x| x + 1);
    let (ta, tb) = (targets(ma), targets(mb));
    if wa.len() != wb.len() || ta != tb {
        return false;
    }
    struct S<'a> {
        wa: &'a [u32],
        ma: &'a [usize],
        wb: &'a [u32],
        mb: &'a [usize],
        used: Vec<bool>,
        beta: Vec<Option<usize>>,
        beta_used: Vec<bool>,
    }
    fn rec(i: usize, s: &mut S) -> bool {
        if i == s.wa.len() {
            // targets carry fiber sums, so β preserves target weights
            let mut ok = true;
            for (t, b) in s.beta.iter().enumerate() {
                let sa: u32 = (0..s.wa.len()).filter(|&k| s.ma[k] == t).map(|k| s.wa[k]).sum();
                let sb: u32 = (0..s.wb.len()).filter(|&k| Some(s.mb[k]) == *b).map(|k| s.wb[k]).sum();
                ok &= sa == sb;
            }
            return ok;
        }
        for j in 0..s.wb.len() {
            if s.used[j] || s.wa[i] != s.wb[j] {
                continue;
            }
            let (ta, tb) = (s.ma[i], s.mb[j]);
            let fresh = match s.beta[ta] {
                Some(x) if x == tb => false,
                Some(_) => continue,
                None if s.beta_used[tb] => continue,
                None => true,
            };
            s.used[j] = true;
            if fresh {
                s.beta[ta] = Some(tb);
                s.beta_used[tb] = true;
            }
            if rec(i + 1, s) {
                return true;
            }
            s.used[j] = false;
            if fresh {
                s.beta[ta] = None;
                s.beta_used[tb] = false;
            }
        }
        false
    }
    let mut s = S { wa, ma, wb, mb, used: vec![false; wb.len()], beta: vec![None; ta], beta_used: vec![false; tb] };
    rec(0, &mut s)
}

/// Whether some weight-preserving permutation `g` has `g·e1 = e2`, with
/// partitions given as block labels and weights as integers.
pub fn permutation_carries(weights: &[u32], l1: &[usize], l2: &[usize]) -> bool {
    let n = weights.len();
    fn rec(
        i: usize,
        w: &[u32],
        l1: &[usize],
        l2: &[usize],
        used: &mut [bool],
        lab: &mut HashMap<usize, usize>,
        rev: &mut HashMap<usize, usize>,
    ) -> bool {
        if i == w.len() {
            return true;
        }
        for j in 0..w.len() {
            if used[j] || w[i] != w[j] {
                continue;
            }
            let (a, b) = (l1[i], l2[j]);
            let fresh = match (lab.get(&a), rev.get(&b)) {
                (Some(&x), _) if x == b => false,
                (None, None) => true,
                _ => continue,
            };
            used[j] = true;
            if fresh {
                lab.insert(a, b);
                rev.insert(b, a);
            }
            if rec(i + 1, w, l1, l2, used, lab, rev) {
                return true;
            }
            used[j] = false;
            if fresh {
                lab.remove(&a);
                rev.remove(&b);
            }
        }
        false
    }
    rec(0, weights, l1, l2, &mut vec![false; n], &mut HashMap::new(), &mut HashMap::new())
}

/// Positive integer weights summing to `den`, one per atom (`n ≤ den`).
pub fn random_units(rng: &mut impl Rng, n: usize, den: u32) -> Vec<u32> {
    let mut units = vec![1u32; n];
    for _ in 0..den - n as u32 {
        units[rng.random_range(0..n)] += 1;
    }
    units
}

pub fn random_labels(rng: &mut impl Rng, n: usize, max_blocks: usize) -> Vec<usize> {
    let k = rng.random_range(1..=max_blocks.max(1));
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

/// Merges blocks of `labels` through a random map of block labels.
pub fn random_coarsening(rng: &mut impl Rng, labels: &[usize]) -> Vec<usize> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let target = rng.random_range(1..=k.max(1));
    let merge: Vec<usize> = (0..k).map(|_| rng.random_range(0..target)).collect();
    labels.iter().map(|&l| merge[l]).collect()
}

pub fn partition(space: &Arc<ProbSpace>, labels: &[usize]) -> Partition {
    Partition::from_labels(space.clone(), labels)
}

/// Dense rational matrix product.
pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b).fold(Rational::from_integer(0.into()), |acc, (x, r)| acc + x * &r[j]))
                .collect()
        })
        .collect()
}
