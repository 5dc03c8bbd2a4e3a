//! Distances between subsets of a finite metric space: the Hausdorff
//! metric, the probe-weighted Wijsman metric, and the finite checks behind
//! the sandwich argument and closedness of operation-stable sets.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_exact, Rational};

/// Points with an exact metric bounded by 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<Rational>>,
}

impl FiniteMetricSpace {
    /// Validates symmetry, zero diagonal, positivity off the diagonal, the
    /// bound `dist ≤ 1` and the triangle inequality.
    #[allow(clippy::needless_range_loop)]
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Rational>>) -> Result<Self> {
        let n = labels.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidMetric(format!("distance matrix must be {n}x{n}")));
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(Error::InvalidMetric(format!("nonzero diagonal at {}", i + 1)));
            }
            for j in 0..n {
                let d = &dist[i][j];
                if d != &dist[j][i] {
                    return Err(Error::InvalidMetric(format!("asymmetric at ({}, {})", i + 1, j + 1)));
                }
                if i != j && !d.is_positive() {
                    return Err(Error::InvalidMetric(format!("nonpositive distance at ({}, {})", i + 1, j + 1)));
                }
                if d > &Rational::one() {
                    return Err(Error::InvalidMetric(format!("distance {} exceeds 1", fmt_exact(d))));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][k] > &dist[i][j] + &dist[j][k] {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails for ({}, {}, {})",
                            i + 1,
                            j + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { labels, dist })
    }

    /// Points on the real line with distance `min(1, |x - y|)`.
    pub fn capped_line(points: &[Rational]) -> Result<Self> {
        let labels = points.iter().map(fmt_exact).collect();
        let dist = points.iter().map(|x| points.iter().map(|y| (x - y).abs().min(Rational::one())).collect()).collect();
        Self::new(labels, dist)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self, x: usize, y: usize) -> &Rational {
        &self.dist[x][y]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    fn check_points(&self, set: &[usize]) -> Result<()> {
        match set.iter().find(|&&p| p >= self.len()) {
            Some(&p) => Err(Error::UnknownPoint(p)),
            None => Ok(()),
        }
    }

    /// `dist(x, ∅) = 1`.
    pub fn dist_to_set(&self, x: usize, set: &[usize]) -> Rational {
        set.iter().map(|&y| self.dist[x][y].clone()).min().unwrap_or_else(Rational::one)
    }

    pub fn hausdorff_distance(&self, k1: &[usize], k2: &[usize]) -> Result<Rational> {
        self.check_points(k1)?;
        self.check_points(k2)?;
        Ok((0..self.len())
            .map(|x| (self.dist_to_set(x, k1) - self.dist_to_set(x, k2)).abs())
            .max()
            .unwrap_or_else(Rational::zero))
    }

    fn check_probes(&self, probes: &[usize]) -> Result<()> {
        self.check_points(probes)?;
        let mut seen = vec![false; self.len()];
        for &p in probes {
            seen[p] = true;
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(Error::IncompleteProbes)
        }
    }

    /// `max_n (1/n) |dist(x_n, F1) - dist(x_n, F2)|` over the probe order.
    pub fn wijsman_distance(&self, f1: &[usize], f2: &[usize], probes: &[usize]) -> Result<Rational> {
        self.check_points(f1)?;
        self.check_points(f2)?;
        self.check_probes(probes)?;
        Ok(self.wijsman_unchecked(f1, f2, probes))
    }

    fn wijsman_unchecked(&self, f1: &[usize], f2: &[usize], probes: &[usize]) -> Rational {
        probes
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                (self.dist_to_set(x, f1) - self.dist_to_set(x, f2)).abs()
                    / Rational::from_integer((i as u64 + 1).into())
            })
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// For `e_n ⊂ f_n ⊂ g_n`, checks
    /// `d(f_n, limit) ≤ max(d(e_n, limit), d(g_n, limit))` at every `n` with
    /// the Wijsman distance.
    pub fn check_sandwich(
        &self,
        e_seq: &[Vec<usize>],
        f_seq: &[Vec<usize>],
        g_seq: &[Vec<usize>],
        limit: &[usize],
        probes: &[usize],
    ) -> Result<bool> {
        if e_seq.len() != f_seq.len() || f_seq.len() != g_seq.len() {
            return Err(Error::LengthMismatch { expected: e_seq.len(), got: f_seq.len().min(g_seq.len()) });
        }
        self.check_points(limit)?;
        self.check_probes(probes)?;
        for (n, ((e, f), g)) in e_seq.iter().zip(f_seq).zip(g_seq).enumerate() {
            for s in [e, f, g] {
                self.check_points(s)?;
            }
            if !is_subset(e, f) || !is_subset(f, g) {
                return Err(Error::InclusionViolation(n));
            }
        }
        Ok(e_seq.iter().zip(f_seq).zip(g_seq).all(|((e, f), g)| {
            let (de, df, dg) = (
                self.wijsman_unchecked(e, limit, probes),
                self.wijsman_unchecked(f, limit, probes),
                self.wijsman_unchecked(g, limit, probes),
            );
            df <= de.max(dg)
        }))
    }

    /// Each set in `sets` must be closed under `op`; reports whether `limit`
    /// is closed too, and the Wijsman distance of every set to `limit`.
    pub fn check_operation_closed(
        &self,
        sets: &[Vec<usize>],
        op: impl Fn(usize, usize) -> Option<usize>,
        limit: &[usize],
        probes: &[usize],
    ) -> Result<ClosureReport> {
        self.check_points(limit)?;
        self.check_probes(probes)?;
        let apply = |x: usize, y: usize| -> Result<usize> {
            match op(x, y) {
                Some(z) if z < self.len() => Ok(z),
                _ => Err(Error::OpPartial(x, y)),
            }
        };
        for (i, set) in sets.iter().enumerate() {
            self.check_points(set)?;
            if closure_witness(set, &apply)?.is_some() {
                return Err(Error::NotClosed(i));
            }
        }
        let witness = closure_witness(limit, &apply)?;
        let distances = sets.iter().map(|s| self.wijsman_unchecked(s, limit, probes)).collect();
        Ok(ClosureReport { closed: witness.is_none(), witness, distances })
    }
}

/// Result of [`FiniteMetricSpace::check_operation_closed`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureReport {
    pub closed: bool,
    /// A pair `(x, y)` in the limit whose image leaves it.
    pub witness: Option<(usize, usize)>,
    pub distances: Vec<Rational>,
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

fn closure_witness(set: &[usize], apply: &impl Fn(usize, usize) -> Result<usize>) -> Result<Option<(usize, usize)>> {
    for &x in set {
        for &y in set {
            if !set.contains(&apply(x, y)?) {
                return Ok(Some((x, y)));
            }
        }
    }
    Ok(None)
}
