//! Measure-preserving maps between finite spaces, quotients, and the
//! fiber-profile invariant classifying morphisms up to commuting
//! isomorphisms.

use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::rational::Rational;
use crate::space::ProbSpace;

/// A measure-preserving surjection of source atoms onto target atoms,
/// directed source → target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    source: Arc<ProbSpace>,
    target: Arc<ProbSpace>,
    map: Vec<usize>,
}

/// Canonical multiset of `(target weight, fiber profile)` pairs, where the
/// fiber profile lists the conditional weights `P(a)/P(b)` of the fiber
/// over `b` in non-increasing order. Sorted by weight descending, then
/// profile lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MorphismInvariant {
    pub fibers: Vec<(Rational, Vec<Rational>)>,
}

impl Morphism {
    pub fn new(source: Arc<ProbSpace>, target: Arc<ProbSpace>, map: Vec<usize>) -> Result<Self> {
        source.require_atomic()?;
        target.require_atomic()?;
        if map.len() != source.len() {
            return Err(Error::LengthMismatch { expected: source.len(), got: map.len() });
        }
        let mut pushed = vec![Rational::zero(); target.len()];
        for (a, &b) in map.iter().enumerate() {
            if b >= target.len() {
                return Err(Error::InvalidMorphism(format!("target atom {} out of range", b + 1)));
            }
            pushed[b] += source.weight(a);
        }
        for (b, mass) in pushed.iter().enumerate() {
            if mass.is_zero() {
                return Err(Error::InvalidMorphism(format!("target atom {} has empty fiber", b + 1)));
            }
            if mass != target.weight(b) {
                return Err(Error::InvalidMorphism(format!("target atom {} does not receive its mass", b + 1)));
            }
        }
        Ok(Morphism { source, target, map })
    }

    pub fn identity(space: Arc<ProbSpace>) -> Result<Self> {
        let map = (0..space.len()).collect();
        Self::new(space.clone(), space, map)
    }

    pub fn source(&self) -> &Arc<ProbSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ProbSpace> {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Source atoms over each target atom.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut fibers = vec![Vec::new(); self.target.len()];
        for (a, &b) in self.map.iter().enumerate() {
            fibers[b].push(a);
        }
        fibers
    }

    /// The sigma-field on the source generated by the map.
    pub fn kernel(&self) -> Partition {
        Partition::from_labels(self.source.clone(), &self.map)
    }

    /// Preimage of a partition of the target.
    pub fn pull_back(&self, e: &Partition) -> Result<Partition> {
        if !e.ambient().same_measure(&self.target) {
            return Err(Error::AmbientMismatch);
        }
        let labels: Vec<usize> = self.map.iter().map(|&b| e.block_of(b)).collect();
        Ok(Partition::from_labels(self.source.clone(), &labels))
    }

    /// Image of a source partition that is coarser than the kernel.
    pub fn push_forward(&self, e: &Partition) -> Result<Partition> {
        if !e.ambient().same_measure(&self.source) {
            return Err(Error::AmbientMismatch);
        }
        if !e.is_coarser_than(&self.kernel()) {
            return Err(Error::NotRefining);
        }
        let mut labels = vec![0usize; self.target.len()];
        for (a, &b) in self.map.iter().enumerate() {
            labels[b] = e.block_of(a);
        }
        Ok(Partition::from_labels(self.target.clone(), &labels))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Morphism) -> Result<Morphism> {
        if !self.target.same_measure(&next.source) {
            return Err(Error::AmbientMismatch);
        }
        let map = self.map.iter().map(|&b| next.map[b]).collect();
        Morphism::new(self.source.clone(), next.target.clone(), map)
    }

    pub fn invariant(&self) -> MorphismInvariant {
        let mut fibers: Vec<(Rational, Vec<Rational>)> = self
            .fibers()
            .into_iter()
            .enumerate()
            .map(|(b, fiber)| {
                let pb = self.target.weight(b);
                let mut profile: Vec<Rational> = fiber.iter().map(|&a| self.source.weight(a) / pb).collect();
                profile.sort_by(|x, y| y.cmp(x));
                (pb.clone(), profile)
            })
            .collect();
        fibers.sort_by(|(w1, p1), (w2, p2)| w2.cmp(w1).then_with(|| p1.cmp(p2)));
        MorphismInvariant { fibers }
    }

    pub fn is_isomorphic(&self, other: &Morphism) -> bool {
        self.invariant() == other.invariant()
    }

    /// Every fiber carries equal conditional weights.
    pub fn is_conditionally_uniform(&self) -> bool {
        self.invariant().fibers.iter().all(|(_, p)| p.windows(2).all(|w| w[0] == w[1]))
    }
}

/// Quotient of the ambient space by `e`: one target atom per block, in
/// block order, with the block masses.
pub fn quotient(e: &Partition) -> (Arc<ProbSpace>, Morphism) {
    let target = Arc::new(ProbSpace::atomic(e.block_masses()).expect("block masses sum to one"));
    let map = e.block_labels().to_vec();
    let m = Morphism::new(e.ambient().clone(), target.clone(), map).expect("quotient map preserves mass");
    (target, m)
}
