//! Filtrations on a finite time grid: canonical tree invariants, the sup
//! metric, martingale and immersion checks, and products.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::partition::{sigma_metric, Partition, ProbeSequence};
use crate::rational::{fmt_exact, Rational};
use crate::space::ProbSpace;

/// Largest ambient for which [`exists_immersion_morphism`] searches the
/// automorphism group exhaustively.
pub const MAX_SEARCH_ATOMS: usize = 8;

/// Outcome of a decision procedure that may give up at large scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    True,
    False,
    Undecided,
}

impl Decision {
    pub fn exit_code(self) -> i32 {
        match self {
            Decision::True => 0,
            Decision::False => 1,
            Decision::Undecided => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::True => "true",
            Decision::False => "false",
            Decision::Undecided => "undecided",
        }
    }
}

impl From<bool> for Decision {
    fn from(b: bool) -> Self {
        if b {
            Decision::True
        } else {
            Decision::False
        }
    }
}

/// A refining chain of partitions indexed by a strictly increasing time
/// grid, starting from the trivial partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtration {
    ambient: Arc<ProbSpace>,
    times: Vec<Rational>,
    stages: Vec<Partition>,
}

impl Filtration {
    pub fn new(ambient: Arc<ProbSpace>, times: Vec<Rational>, stages: Vec<Partition>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidFiltration("no stages".into()));
        }
        if times.len() != stages.len() {
            return Err(Error::LengthMismatch { expected: stages.len(), got: times.len() });
        }
        if let Some(i) = times.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFiltration(format!(
                "times not strictly increasing at index {} ({} then {})",
                i + 1,
                fmt_exact(&times[i]),
                fmt_exact(&times[i + 1])
            )));
        }
        let stages = stages.iter().map(|s| s.rebase(ambient.clone())).collect::<Result<Vec<_>>>()?;
        if !stages[0].is_trivial() {
            return Err(Error::InvalidFiltration("first stage must be trivial".into()));
        }
        if let Some(i) = stages.windows(2).position(|w| !w[0].is_coarser_than(&w[1])) {
            return Err(Error::InvalidFiltration(format!("stage {} does not refine stage {}", i + 1, i)));
        }
        Ok(Filtration { ambient, times, stages })
    }

    /// Stages on the grid `0, 1, 2, …`.
    pub fn from_stages(stages: Vec<Partition>) -> Result<Self> {
        let ambient = stages.first().ok_or_else(|| Error::InvalidFiltration("no stages".into()))?.ambient().clone();
        let times = (0..stages.len()).map(|t| Rational::from_integer((t as u64).into())).collect();
        Self::new(ambient, times, stages)
    }

    /// All stages trivial.
    pub fn trivial(ambient: Arc<ProbSpace>, len: usize) -> Self {
        let stages = vec![Partition::trivial(ambient.clone()); len];
        Self::from_stages(stages).expect("trivial chain is a filtration")
    }

    pub fn ambient(&self) -> &Arc<ProbSpace> {
        &self.ambient
    }

    pub fn times(&self) -> &[Rational] {
        &self.times
    }

    pub fn stages(&self) -> &[Partition] {
        &self.stages
    }

    pub fn stage(&self, t: usize) -> &Partition {
        &self.stages[t]
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn last(&self) -> &Partition {
        self.stages.last().expect("filtrations have at least one stage")
    }

    fn check_compatible(&self, other: &Filtration) -> Result<()> {
        if !self.ambient.same_measure(&other.ambient) {
            return Err(Error::AmbientMismatch);
        }
        if self.len() != other.len() {
            return Err(Error::GridMismatch(self.len(), other.len()));
        }
        Ok(())
    }

    /// Stage-wise image under an atom permutation.
    pub fn permuted(&self, perm: &[usize]) -> Filtration {
        Filtration {
            ambient: self.ambient.clone(),
            times: self.times.clone(),
            stages: self.stages.iter().map(|s| s.permuted(perm)).collect(),
        }
    }

    /// Every stage pulled back to the uniform space with `factor` times as
    /// many atoms.
    pub fn lift_uniform(&self, factor: usize) -> Result<Filtration> {
        let stages = self.stages.iter().map(|s| s.lift_uniform(factor)).collect::<Result<Vec<_>>>()?;
        let ambient = stages[0].ambient().clone();
        Filtration::new(ambient, self.times.clone(), stages)
    }

    pub fn invariant(&self) -> FiltrationInvariant {
        // children[i][b]: blocks of stage i+1 inside block b of stage i
        let depth = self.stages.len();
        let mut children: Vec<Vec<Vec<usize>>> = Vec::with_capacity(depth - 1);
        for i in 0..depth - 1 {
            let (coarse, fine) = (&self.stages[i], &self.stages[i + 1]);
            let mut c = vec![Vec::new(); coarse.num_blocks()];
            for (b, block) in fine.blocks().iter().enumerate() {
                c[coarse.block_of(block[0])].push(b);
            }
            children.push(c);
        }
        let masses: Vec<Vec<Rational>> = self.stages.iter().map(Partition::block_masses).collect();

        fn build(
            level: usize,
            block: usize,
            mass: Rational,
            children: &[Vec<Vec<usize>>],
            masses: &[Vec<Rational>],
        ) -> TreeNode {
            let mut kids: Vec<TreeNode> = match children.get(level) {
                Some(c) => c[block]
                    .iter()
                    .map(|&k| {
                        let cond = &masses[level + 1][k] / &masses[level][block];
                        build(level + 1, k, cond, children, masses)
                    })
                    .collect(),
                None => Vec::new(),
            };
            kids.sort();
            TreeNode { mass, children: kids }
        }

        FiltrationInvariant { root: build(0, 0, Rational::from_integer(1.into()), &children, &masses) }
    }

    pub fn is_isomorphic(&self, other: &Filtration) -> Result<bool> {
        if self.len() != other.len() {
            return Err(Error::GridMismatch(self.len(), other.len()));
        }
        Ok(self.invariant() == other.invariant())
    }

    /// First `(s, t)` with `E[f_t | F_s] ≠ f_s`, if any.
    pub fn martingale_violation(&self, process: &[Vec<Rational>]) -> Result<Option<(usize, usize)>> {
        if process.len() != self.len() {
            return Err(Error::GridMismatch(self.len(), process.len()));
        }
        for (t, f) in process.iter().enumerate() {
            if !self.stages[t].is_measurable(f)? {
                return Err(Error::MeasurabilityViolation { time: t });
            }
        }
        for t in 0..self.len() {
            for s in 0..t {
                if self.stages[s].cond_exp(&process[t])? != process[s] {
                    return Ok(Some((s, t)));
                }
            }
        }
        Ok(None)
    }

    pub fn is_martingale(&self, process: &[Vec<Rational>]) -> Result<bool> {
        Ok(self.martingale_violation(process)?.is_none())
    }

    pub fn is_immersed_into(&self, f: &Filtration) -> Result<bool> {
        Ok(is_immersed(self, f)?.immersed)
    }
}

/// A node of the canonical tree: the conditional mass of this block within
/// its parent, and its sub-blocks at the next stage. Nodes order by mass
/// descending, then by children.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeNode {
    pub mass: Rational,
    pub children: Vec<TreeNode>,
}

impl Ord for TreeNode {
    fn cmp(&self, other: &Self) -> Ordering {
        other.mass.cmp(&self.mass).then_with(|| self.children.cmp(&other.children))
    }
}

impl PartialOrd for TreeNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical weighted tree of a filtration. Complete up to isomorphism of
/// the quotient by the final stage.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiltrationInvariant {
    pub root: TreeNode,
}

impl FiltrationInvariant {
    pub fn depth(&self) -> usize {
        fn go(n: &TreeNode) -> usize {
            1 + n.children.iter().map(go).max().unwrap_or(0)
        }
        go(&self.root)
    }
}

/// Result of an immersion check, with the first failing `(s, t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImmersionReport {
    pub immersed: bool,
    pub witness: Option<(usize, usize)>,
}

/// `e` is immersed into `f` iff `F_s E_t = E_s` as conditional expectation
/// operators for all `s ≤ t`.
///
/// The identity is checked on a basis: on the indicators of `E_t`-blocks
/// both sides must agree, and on the orthogonal complement of `L_2(E_t)`
/// both sides vanish because `E_s ⊂ E_t`.
pub fn is_immersed(e: &Filtration, f: &Filtration) -> Result<ImmersionReport> {
    e.check_compatible(f)?;
    for t in 0..e.len() {
        let et = &e.stages[t];
        for s in 0..=t {
            for block in 0..et.num_blocks() {
                let ind = et.indicator(block);
                if f.stages[s].cond_exp(&ind)? != e.stages[s].cond_exp(&ind)? {
                    return Ok(ImmersionReport { immersed: false, witness: Some((s, t)) });
                }
            }
        }
    }
    debug_assert!(immersion_cross_checks(e, f));
    Ok(ImmersionReport { immersed: true, witness: None })
}

/// Consequences of immersion: `E_s = F_s ∧ E_t`, and on small ambients the
/// operators `E_t` and `F_s` commute.
fn immersion_cross_checks(e: &Filtration, f: &Filtration) -> bool {
    let n = e.ambient.len();
    (0..e.len()).all(|t| {
        (0..=t).all(|s| {
            let meet_ok = f.stages[s].meet(&e.stages[t]).map(|m| m == e.stages[s]).unwrap_or(false);
            let commute_ok = n > 32 || {
                let (me, mf) = (e.stages[t].operator(), f.stages[s].operator());
                me.compose(&mf) == mf.compose(&me)
            };
            meet_ok && commute_ok
        })
    })
}

/// Whether some weight-preserving atom permutation `g` makes `g·y`
/// immersed into `x`. Exhaustive for ambients of at most
/// [`MAX_SEARCH_ATOMS`] atoms, `Undecided` beyond.
pub fn exists_immersion_morphism(x: &Filtration, y: &Filtration) -> Result<Decision> {
    x.check_compatible(y)?;
    let n = x.ambient.len();
    if n > MAX_SEARCH_ATOMS {
        return Ok(Decision::Undecided);
    }
    let weights = x.ambient.atoms();
    let mut seen: HashSet<Vec<Partition>> = HashSet::new();
    let mut found = false;
    for_each_weight_preserving_permutation(weights, |perm| {
        let image = y.permuted(perm);
        if seen.insert(image.stages.clone()) && is_immersed(&image, x).map(|r| r.immersed).unwrap_or(false) {
            found = true;
        }
        !found
    });
    Ok(found.into())
}

/// Calls `visit` on every permutation `perm` with `weights[perm[a]] ==
/// weights[a]`, stopping early when `visit` returns `false`.
pub fn for_each_weight_preserving_permutation(weights: &[Rational], mut visit: impl FnMut(&[usize]) -> bool) {
    fn go(
        a: usize,
        weights: &[Rational],
        perm: &mut Vec<usize>,
        used: &mut [bool],
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if a == weights.len() {
            return visit(perm);
        }
        for b in 0..weights.len() {
            if !used[b] && weights[b] == weights[a] {
                used[b] = true;
                perm.push(b);
                let go_on = go(a + 1, weights, perm, used, visit);
                perm.pop();
                used[b] = false;
                if !go_on {
                    return false;
                }
            }
        }
        true
    }
    let mut used = vec![false; weights.len()];
    go(0, weights, &mut Vec::with_capacity(weights.len()), &mut used, &mut visit);
}

/// `max_t sigma_metric(x(t), y(t))`.
pub fn filtration_metric(x: &Filtration, y: &Filtration, probes: &ProbeSequence) -> Result<Rational> {
    x.check_compatible(y)?;
    let mut best = Rational::from_integer(0.into());
    for (a, b) in x.stages.iter().zip(&y.stages) {
        let d = sigma_metric(a, b, probes)?;
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

/// Stage-wise product of two filtrations with independent stages.
pub fn product_filtration(x: &Filtration, y: &Filtration) -> Result<Filtration> {
    x.check_compatible(y)?;
    let mut stages = Vec::with_capacity(x.len());
    for (t, (a, b)) in x.stages.iter().zip(&y.stages).enumerate() {
        if !a.independent(b)? {
            return Err(Error::DependentFactors { time: Some(t) });
        }
        stages.push(a.join(b)?);
    }
    Filtration::new(x.ambient.clone(), x.times.clone(), stages)
}
