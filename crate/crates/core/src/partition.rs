//! Sub-sigma-fields of a finite atomic space, represented as partitions of
//! the atom indices, together with conditional expectation, the lattice
//! operations, independence, the probe metric and the atomicity functionals.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_exact, sum, Rational};
use crate::space::ProbSpace;

/// A sub-sigma-field: disjoint nonempty blocks of atom indices covering the
/// ambient space. Blocks are sorted internally and ordered by their
/// smallest atom.
#[derive(Debug, Clone)]
pub struct Partition {
    ambient: Arc<ProbSpace>,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.blocks == other.blocks && self.ambient.same_measure(&other.ambient)
    }
}

impl Eq for Partition {}

impl Hash for Partition {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.blocks.hash(state);
        self.ambient.atoms().hash(state);
    }
}

impl Partition {
    pub fn from_blocks(ambient: Arc<ProbSpace>, blocks: Vec<Vec<usize>>) -> Result<Self> {
        ambient.require_atomic()?;
        let n = ambient.len();
        let mut label = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &a in block {
                if a >= n {
                    return Err(Error::InvalidPartition(format!("atom {} out of range 1..={n}", a + 1)));
                }
                if label[a] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("atom {} appears twice", a + 1)));
                }
                label[a] = b;
            }
        }
        if let Some(a) = label.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidPartition(format!("atom {} is not covered", a + 1)));
        }
        Ok(Self::from_labels(ambient, &label))
    }

    /// Groups atoms by equal label. `labels[i]` is the label of atom `i`.
    pub fn from_labels<K: Eq + Hash>(ambient: Arc<ProbSpace>, labels: &[K]) -> Self {
        assert_eq!(labels.len(), ambient.len(), "one label per atom");
        assert!(ambient.is_atomic(), "partitions live on atomic spaces");
        let mut ids: HashMap<&K, usize> = HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut block_of = Vec::with_capacity(labels.len());
        for (a, k) in labels.iter().enumerate() {
            let id = *ids.entry(k).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[id].push(a);
            block_of.push(id);
        }
        Partition { ambient, blocks, block_of }
    }

    /// The trivial sigma-field: a single block.
    pub fn trivial(ambient: Arc<ProbSpace>) -> Self {
        let labels = vec![0u8; ambient.len()];
        Self::from_labels(ambient, &labels)
    }

    /// The full sigma-field: all singletons.
    pub fn discrete(ambient: Arc<ProbSpace>) -> Self {
        let labels: Vec<usize> = (0..ambient.len()).collect();
        Self::from_labels(ambient, &labels)
    }

    pub fn ambient(&self) -> &Arc<ProbSpace> {
        &self.ambient
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block containing `atom`.
    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    pub fn block_labels(&self) -> &[usize] {
        &self.block_of
    }

    pub fn block_mass(&self, block: usize) -> Rational {
        sum(self.blocks[block].iter().map(|&a| self.ambient.weight(a)))
    }

    pub fn block_masses(&self) -> Vec<Rational> {
        (0..self.blocks.len()).map(|b| self.block_mass(b)).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.len() == self.ambient.len()
    }

    pub(crate) fn check_same_ambient(&self, other: &Partition) -> Result<()> {
        if Arc::ptr_eq(&self.ambient, &other.ambient) || self.ambient.same_measure(&other.ambient) {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    /// `self ⊂ finer` as sigma-fields: every block of `finer` lies inside a
    /// block of `self`.
    pub fn is_coarser_than(&self, finer: &Partition) -> bool {
        finer.blocks.iter().all(|c| c.iter().all(|&a| self.block_of[a] == self.block_of[c[0]]))
    }

    /// Least common refinement (nonempty pairwise intersections).
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        self.check_same_ambient(other)?;
        let labels: Vec<(usize, usize)> = self.block_of.iter().copied().zip(other.block_of.iter().copied()).collect();
        Ok(Self::from_labels(self.ambient.clone(), &labels))
    }

    /// Finest common coarsening: connected components of the block-overlap
    /// graph.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        self.check_same_ambient(other)?;
        let n = self.ambient.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for blocks in [&self.blocks, &other.blocks] {
            for block in blocks.iter() {
                for &a in &block[1..] {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, block[0]));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let labels: Vec<usize> = (0..n).map(|a| find(&mut parent, a)).collect();
        Ok(Self::from_labels(self.ambient.clone(), &labels))
    }

    /// `P(A ∩ B) = P(A) P(B)` for every block `A` of `self` and `B` of `other`.
    pub fn independent(&self, other: &Partition) -> Result<bool> {
        self.check_same_ambient(other)?;
        let mut joint: HashMap<(usize, usize), Rational> = HashMap::new();
        for (a, w) in self.ambient.atoms().iter().enumerate() {
            *joint.entry((self.block_of[a], other.block_of[a])).or_insert_with(Rational::zero) += w;
        }
        let (pe, pf) = (self.block_masses(), other.block_masses());
        for (i, p) in pe.iter().enumerate() {
            for (j, q) in pf.iter().enumerate() {
                let pq = p * q;
                let actual = joint.get(&(i, j));
                match actual {
                    Some(m) if *m == pq => {}
                    None if pq.is_zero() => {}
                    _ => return Ok(false),
                }
            }
        }
        Ok(true)
    }

    /// The join of two independent sigma-fields.
    pub fn product(&self, other: &Partition) -> Result<Partition> {
        if !self.independent(other)? {
            return Err(Error::DependentFactors { time: None });
        }
        self.join(other)
    }

    /// Conditional expectation: weighted block averages.
    pub fn cond_exp(&self, f: &[Rational]) -> Result<Vec<Rational>> {
        self.check_len(f)?;
        let averages = self.block_averages(f);
        Ok(self.block_of.iter().map(|&b| averages[b].clone()).collect())
    }

    fn block_averages(&self, f: &[Rational]) -> Vec<Rational> {
        let w = self.ambient.atoms();
        self.blocks
            .iter()
            .map(|block| {
                let (num, den) = block
                    .iter()
                    .fold((Rational::zero(), Rational::zero()), |(n, d), &a| (n + &w[a] * &f[a], d + &w[a]));
                num / den
            })
            .collect()
    }

    fn check_len(&self, f: &[Rational]) -> Result<()> {
        if f.len() != self.ambient.len() {
            return Err(Error::LengthMismatch { expected: self.ambient.len(), got: f.len() });
        }
        Ok(())
    }

    /// Whether `f` is constant on every block.
    pub fn is_measurable(&self, f: &[Rational]) -> Result<bool> {
        self.check_len(f)?;
        Ok(self.blocks.iter().all(|block| block.iter().all(|&a| f[a] == f[block[0]])))
    }

    pub fn operator(&self) -> CondExpOperator {
        CondExpOperator::new(self)
    }

    /// Indicator vector of a block.
    pub fn indicator(&self, block: usize) -> Vec<Rational> {
        (0..self.ambient.len())
            .map(|a| if self.block_of[a] == block { Rational::one() } else { Rational::zero() })
            .collect()
    }

    /// Same partition moved to an ambient with identical weights.
    pub fn rebase(&self, ambient: Arc<ProbSpace>) -> Result<Partition> {
        if !ambient.same_measure(&self.ambient) {
            return Err(Error::AmbientMismatch);
        }
        Ok(Partition { ambient, blocks: self.blocks.clone(), block_of: self.block_of.clone() })
    }

    /// Pulls the partition back to the uniform space with `factor` times
    /// as many atoms, each atom split into `factor` consecutive pieces.
    pub fn lift_uniform(&self, factor: usize) -> Result<Partition> {
        if !self.ambient.is_uniform() {
            return Err(Error::NotUniform);
        }
        let ambient = Arc::new(ProbSpace::uniform(self.ambient.len() * factor));
        let labels: Vec<usize> = (0..ambient.len()).map(|a| self.block_of[a / factor]).collect();
        Ok(Partition::from_labels(ambient, &labels))
    }

    /// Image under the atom permutation `perm` (`a ↦ perm[a]`).
    pub fn permuted(&self, perm: &[usize]) -> Partition {
        assert_eq!(perm.len(), self.ambient.len(), "permutation length");
        let mut labels = vec![0usize; perm.len()];
        for (a, &b) in perm.iter().enumerate() {
            labels[b] = self.block_of[a];
        }
        Partition::from_labels(self.ambient.clone(), &labels)
    }

    pub fn sigma_metric(&self, other: &Partition, probes: &ProbeSequence) -> Result<Rational> {
        sigma_metric(self, other, probes)
    }
}

/// Matrix of `f ↦ E[f | e]` on atom-indexed vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondExpOperator {
    matrix: Vec<Vec<Rational>>,
    weights: Vec<Rational>,
}

impl CondExpOperator {
    pub fn new(e: &Partition) -> Self {
        let n = e.ambient.len();
        let masses = e.block_masses();
        let w = e.ambient.atoms();
        let matrix = (0..n)
            .map(|i| {
                let b = e.block_of[i];
                (0..n).map(|j| if e.block_of[j] == b { &w[j] / &masses[b] } else { Rational::zero() }).collect()
            })
            .collect();
        CondExpOperator { matrix, weights: w.to_vec() }
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn apply(&self, f: &[Rational]) -> Vec<Rational> {
        self.matrix.iter().map(|row| sum_products(row, f)).collect()
    }

    /// `self · other` as a plain matrix.
    pub fn compose(&self, other: &CondExpOperator) -> Vec<Vec<Rational>> {
        mat_mul(&self.matrix, &other.matrix)
    }

    pub fn is_idempotent(&self) -> bool {
        self.compose(self) == self.matrix
    }

    /// Self-adjoint for `⟨f, g⟩ = Σ p_i f_i g_i`, i.e. `p_i M_ij = p_j M_ji`.
    pub fn is_self_adjoint(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| &self.weights[i] * &self.matrix[i][j] == &self.weights[j] * &self.matrix[j][i]))
    }

    pub fn preserves_constants(&self) -> bool {
        self.matrix.iter().all(|row| sum(row).is_one())
    }
}

fn sum_products(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).filter(|(x, _)| !x.is_zero()).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let m = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, x)| !x.is_zero())
                        .fold(Rational::zero(), |acc, (k, x)| acc + x * &b[k][j])
                })
                .collect()
        })
        .collect()
}

/// Where a probe vector comes from in the canonical enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    Constant,
    /// Block `index` of the depth-`depth` cylinder partition.
    Cylinder {
        depth: u32,
        index: usize,
    },
    /// `x_i = i` (1-based atom index).
    Coordinate,
    /// Indicator of one atom.
    Singleton {
        atom: usize,
    },
    /// Indicator of two atoms, `first < second`.
    Pair {
        first: usize,
        second: usize,
    },
}

/// Pair indicators are appended only up to this many atoms.
pub const PAIR_PROBE_LIMIT: usize = 16;

/// A sparse probe function with its squared weighted norm.
#[derive(Debug, Clone)]
pub struct Probe {
    entries: Vec<(usize, Rational)>,
    norm_sq: Rational,
    kind: ProbeKind,
}

impl Probe {
    fn new(ambient: &ProbSpace, entries: Vec<(usize, Rational)>, kind: ProbeKind) -> Self {
        let norm_sq = entries.iter().fold(Rational::zero(), |acc, (a, x)| acc + ambient.weight(*a) * x * x);
        Probe { entries, norm_sq, kind }
    }

    pub fn kind(&self) -> ProbeKind {
        self.kind
    }

    pub fn norm_sq(&self) -> &Rational {
        &self.norm_sq
    }

    pub fn to_dense(&self, n: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); n];
        for (a, x) in &self.entries {
            v[*a] = x.clone();
        }
        v
    }

    /// `‖Π_e x‖²`, given the block masses of `e`.
    fn projected_norm_sq(&self, e: &Partition, masses: &[Rational]) -> Rational {
        let w = e.ambient.atoms();
        let mut touched: HashMap<usize, Rational> = HashMap::new();
        for (a, x) in &self.entries {
            *touched.entry(e.block_of[*a]).or_insert_with(Rational::zero) += &w[*a] * x;
        }
        touched.into_iter().fold(Rational::zero(), |acc, (b, s)| acc + &s * &s / &masses[b])
    }
}

/// The fixed dense family of probe functions used by the sigma-field
/// metric, in order: the constant `1`, the indicators of the dyadic
/// cylinder partitions by increasing depth (depth `d` splits the atom
/// indices into `2^d` contiguous chunks, `i ↦ ⌊i·2^d/N⌋`), and the
/// coordinate vector `x_i = i`, the atom indicators, and on ambients of at
/// most [`PAIR_PROBE_LIMIT`] atoms the indicators of atom pairs in
/// lexicographic order. Probe `n` (1-based) carries weight `1/n`.
///
/// Atom indicators recover the mass of the block of every atom, and pair
/// indicators tell whether two atoms of equal block mass share a block, so
/// with pairs present the profile determines the partition.
#[derive(Debug, Clone)]
pub struct ProbeSequence {
    ambient: Arc<ProbSpace>,
    probes: Vec<Probe>,
}

impl ProbeSequence {
    pub fn canonical(ambient: Arc<ProbSpace>) -> Result<Self> {
        ambient.require_atomic()?;
        let n = ambient.len();
        let mut probes =
            vec![Probe::new(&ambient, (0..n).map(|a| (a, Rational::one())).collect(), ProbeKind::Constant)];
        let mut depth = 0u32;
        while (1usize << depth) < n {
            depth += 1;
            let chunks = 1usize << depth;
            let mut current: Option<(usize, Vec<(usize, Rational)>)> = None;
            for a in 0..n {
                let idx = a * chunks / n;
                match &mut current {
                    Some((i, entries)) if *i == idx => entries.push((a, Rational::one())),
                    _ => {
                        if let Some((i, entries)) = current.take() {
                            probes.push(Probe::new(&ambient, entries, ProbeKind::Cylinder { depth, index: i }));
                        }
                        current = Some((idx, vec![(a, Rational::one())]));
                    }
                }
            }
            if let Some((i, entries)) = current {
                probes.push(Probe::new(&ambient, entries, ProbeKind::Cylinder { depth, index: i }));
            }
        }
        let coord = (0..n).map(|a| (a, Rational::from_integer((a as u64 + 1).into()))).collect();
        probes.push(Probe::new(&ambient, coord, ProbeKind::Coordinate));
        for atom in 0..n {
            probes.push(Probe::new(&ambient, vec![(atom, Rational::one())], ProbeKind::Singleton { atom }));
        }
        if n <= PAIR_PROBE_LIMIT {
            for first in 0..n {
                for second in first + 1..n {
                    let entries = vec![(first, Rational::one()), (second, Rational::one())];
                    probes.push(Probe::new(&ambient, entries, ProbeKind::Pair { first, second }));
                }
            }
        }
        Ok(ProbeSequence { ambient, probes })
    }

    pub fn ambient(&self) -> &Arc<ProbSpace> {
        &self.ambient
    }

    pub fn probes(&self) -> &[Probe] {
        &self.probes
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }

    /// 1-based position of the first cylinder probe of the given depth.
    pub fn first_position_of_depth(&self, depth: u32) -> Option<usize> {
        self.probes
            .iter()
            .position(|p| matches!(p.kind, ProbeKind::Cylinder { depth: d, .. } if d == depth))
            .map(|i| i + 1)
    }

    fn check(&self, e: &Partition) -> Result<()> {
        if self.ambient.same_measure(&e.ambient) {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    /// Normalised squared distances `d(x_n, L_2(e))² / ‖x_n‖²`, one per probe.
    pub fn profile(&self, e: &Partition) -> Result<DistanceProfile> {
        self.check(e)?;
        let masses = e.block_masses();
        let values = self.probes.iter().map(|p| (&p.norm_sq - p.projected_norm_sq(e, &masses)) / &p.norm_sq).collect();
        Ok(DistanceProfile { values })
    }
}

/// Per-probe normalised squared distances of one sigma-field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DistanceProfile {
    values: Vec<Rational>,
}

impl DistanceProfile {
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Weighted terms `(1/n) |a_n - b_n|`.
    pub fn terms(&self, other: &DistanceProfile) -> Vec<Rational> {
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| (a - b).abs() / Rational::from_integer((i as u64 + 1).into()))
            .collect()
    }

    pub fn distance(&self, other: &DistanceProfile) -> Rational {
        self.terms(other).into_iter().max().unwrap_or_else(Rational::zero)
    }
}

/// Probe metric between sigma-fields seen as closed subspaces of `L_2`:
/// `max_n (1/n) |d(x_n, L_2(e))² − d(x_n, L_2(f))²|` over the normalised
/// probes. Every term lies in `[0, 1/n]`.
pub fn sigma_metric(e: &Partition, f: &Partition, probes: &ProbeSequence) -> Result<Rational> {
    e.check_same_ambient(f)?;
    Ok(probes.profile(e)?.distance(&probes.profile(f)?))
}

/// Per-probe terms of [`sigma_metric`].
pub fn sigma_metric_terms(e: &Partition, f: &Partition, probes: &ProbeSequence) -> Result<Vec<Rational>> {
    e.check_same_ambient(f)?;
    Ok(probes.profile(e)?.terms(&probes.profile(f)?))
}

/// `max_n (1/n) ‖Π_e x_n − Π_f x_n‖² / ‖x_n‖²`.
pub fn projection_convergence_gap(e: &Partition, f: &Partition, probes: &ProbeSequence) -> Result<Rational> {
    e.check_same_ambient(f)?;
    probes.check(e)?;
    let n = e.ambient.len();
    let w = e.ambient.atoms();
    let mut best = Rational::zero();
    for (i, p) in probes.probes.iter().enumerate() {
        let x = p.to_dense(n);
        let (pe, pf) = (e.cond_exp(&x)?, f.cond_exp(&x)?);
        let gap = (0..n).fold(Rational::zero(), |acc, a| {
            let d = &pe[a] - &pf[a];
            acc + &w[a] * &d * &d
        });
        let term = gap / &p.norm_sq / Rational::from_integer((i as u64 + 1).into());
        if term > best {
            best = term;
        }
    }
    Ok(best)
}

/// Largest single-point mass of a finite distribution.
pub fn phi_max_atom(dist: &[Rational]) -> Result<Rational> {
    if let Some(x) = dist.iter().find(|x| x.is_negative()) {
        return Err(Error::InvalidWeight(fmt_exact(x)));
    }
    let total = sum(dist);
    if !total.is_one() {
        return Err(Error::NonNormalized(fmt_exact(&total)));
    }
    Ok(dist.iter().max().cloned().unwrap_or_else(Rational::zero))
}

/// For every `e1`-block, the masses of the `e2`-blocks inside it.
fn nested_masses(e1: &Partition, e2: &Partition) -> Result<Vec<Vec<Rational>>> {
    e1.check_same_ambient(e2)?;
    if !e1.is_coarser_than(e2) {
        return Err(Error::NotRefining);
    }
    let mut nested = vec![Vec::new(); e1.num_blocks()];
    for (c, mass) in e2.block_masses().into_iter().enumerate() {
        nested[e1.block_of[e2.blocks[c][0]]].push(mass);
    }
    Ok(nested)
}

/// Conditional atomicity `ψ(e2 | e1) = Σ_{B ∈ e1} max{P(C) : C ∈ e2, C ⊆ B}`,
/// the value of `inf_f E φ(P_{E[f|e2] | e1})` at finite scale.
pub fn psi_conditional_atomicity(e1: &Partition, e2: &Partition) -> Result<Rational> {
    let nested = nested_masses(e1, e2)?;
    Ok(nested.iter().fold(Rational::zero(), |acc, ms| acc + ms.iter().max().expect("blocks are nonempty")))
}

/// Whether all `e2`-blocks inside each `e1`-block have equal mass.
pub fn conditionally_uniform(e1: &Partition, e2: &Partition) -> Result<bool> {
    let nested = nested_masses(e1, e2)?;
    Ok(nested.iter().all(|ms| ms.windows(2).all(|w| w[0] == w[1])))
}
