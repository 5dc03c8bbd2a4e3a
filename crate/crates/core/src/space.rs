//! Finite Lebesgue-Rokhlin spaces and their Rokhlin classification.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::rational::{fmt_exact, sum, Rational};

/// A probability space made of finitely many atoms plus an optional
/// nonatomic part of mass `continuum`.
///
/// Zero-weight atoms are dropped on construction, so every stored atom has
/// positive mass, and `sum(atoms) + continuum == 1` holds exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProbSpace {
    atoms: Vec<Rational>,
    continuum: Rational,
    labels: Option<Vec<String>>,
}

/// Complete isomorphism invariant of a space: the nonatomic mass and the
/// atom weights in non-increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RokhlinInvariant {
    pub m0: Rational,
    pub sorted_weights: Vec<Rational>,
}

impl ProbSpace {
    pub fn new(atoms: Vec<Rational>, continuum: Rational) -> Result<Self> {
        Self::build(atoms, continuum, None)
    }

    pub fn with_labels(atoms: Vec<Rational>, continuum: Rational, labels: Vec<String>) -> Result<Self> {
        if labels.len() != atoms.len() {
            return Err(Error::LengthMismatch { expected: atoms.len(), got: labels.len() });
        }
        Self::build(atoms, continuum, Some(labels))
    }

    fn build(atoms: Vec<Rational>, continuum: Rational, labels: Option<Vec<String>>) -> Result<Self> {
        if continuum.is_negative() || continuum > Rational::one() {
            return Err(Error::InvalidWeight(format!("continuum mass {}", fmt_exact(&continuum))));
        }
        if let Some(w) = atoms.iter().find(|w| w.is_negative()) {
            return Err(Error::InvalidWeight(fmt_exact(w)));
        }
        let total = sum(&atoms) + &continuum;
        if !total.is_one() {
            return Err(Error::MassMismatch(fmt_exact(&total)));
        }
        let keep: Vec<bool> = atoms.iter().map(|w| !w.is_zero()).collect();
        let labels = labels.map(|l| l.into_iter().zip(&keep).filter(|(_, k)| **k).map(|(s, _)| s).collect());
        let atoms = atoms.into_iter().filter(|w| !w.is_zero()).collect();
        Ok(ProbSpace { atoms, continuum, labels })
    }

    /// Purely atomic space.
    pub fn atomic(atoms: Vec<Rational>) -> Result<Self> {
        Self::new(atoms, Rational::zero())
    }

    /// `n` atoms of weight `1/n`.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform space needs at least one atom");
        let w = Rational::new(1.into(), (n as u64).into());
        ProbSpace { atoms: vec![w; n], continuum: Rational::zero(), labels: None }
    }

    /// No atoms, all mass nonatomic.
    pub fn continuum_only() -> Self {
        ProbSpace { atoms: Vec::new(), continuum: Rational::one(), labels: None }
    }

    pub fn atoms(&self) -> &[Rational] {
        &self.atoms
    }

    pub fn weight(&self, atom: usize) -> &Rational {
        &self.atoms[atom]
    }

    pub fn continuum(&self) -> &Rational {
        &self.continuum
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_atomic(&self) -> bool {
        self.continuum.is_zero()
    }

    pub fn is_uniform(&self) -> bool {
        self.is_atomic() && self.atoms.windows(2).all(|w| w[0] == w[1])
    }

    /// Same measure, labels ignored.
    pub fn same_measure(&self, other: &ProbSpace) -> bool {
        self.atoms == other.atoms && self.continuum == other.continuum
    }

    pub fn rokhlin_invariant(&self) -> RokhlinInvariant {
        let mut sorted_weights = self.atoms.clone();
        sorted_weights.sort_by(|a, b| b.cmp(a));
        RokhlinInvariant { m0: self.continuum.clone(), sorted_weights }
    }

    pub fn is_isomorphic(&self, other: &ProbSpace) -> bool {
        self.rokhlin_invariant() == other.rokhlin_invariant()
    }

    /// Replaces the nonatomic part by `2^resolution` equal atoms appended
    /// after the existing ones.
    pub fn materialize(&self, resolution: u32) -> ProbSpace {
        if self.continuum.is_zero() {
            return self.clone();
        }
        let pieces = 1usize << resolution;
        let w = &self.continuum / Rational::from_integer(pieces.into());
        let mut atoms = self.atoms.clone();
        atoms.extend(std::iter::repeat_n(w, pieces));
        let labels = self.labels.as_ref().map(|l| {
            let mut l = l.clone();
            l.extend((0..pieces).map(|k| format!("continuum#{k}")));
            l
        });
        ProbSpace { atoms, continuum: Rational::zero(), labels }
    }

    /// Requires a purely atomic space.
    pub(crate) fn require_atomic(&self) -> Result<()> {
        if self.is_atomic() {
            Ok(())
        } else {
            Err(Error::NotAtomic(fmt_exact(&self.continuum)))
        }
    }
}

impl RokhlinInvariant {
    pub fn new(m0: Rational, mut weights: Vec<Rational>) -> Result<Self> {
        weights.retain(|w| !w.is_zero());
        weights.sort_by(|a, b| b.cmp(a));
        // validation goes through the space constructor
        ProbSpace::new(weights.clone(), m0.clone())?;
        Ok(RokhlinInvariant { m0, sorted_weights: weights })
    }

    /// The canonical representative space: atoms in descending order.
    pub fn to_space(&self) -> ProbSpace {
        ProbSpace { atoms: self.sorted_weights.clone(), continuum: self.m0.clone(), labels: None }
    }

    /// Interval construction on a uniform atomic ambient: the leading run of
    /// mass `m0` becomes singleton blocks, then consecutive runs of masses
    /// `m1, m2, ...` become one block each.
    pub fn canonical_transversal_partition(&self, ambient: &Arc<ProbSpace>) -> Result<Transversal> {
        ambient.require_atomic()?;
        if !ambient.is_uniform() {
            return Err(Error::NotUniform);
        }
        let atom = ambient.weight(0).clone();
        let count_of = |mass: &Rational| -> Result<usize> {
            let q = mass / &atom;
            if !q.is_integer() {
                return Err(Error::ResolutionMismatch { mass: fmt_exact(mass), atom: fmt_exact(&atom) });
            }
            Ok(q.to_integer().try_into().expect("atom count fits in usize"))
        };
        let lead = count_of(&self.m0)?;
        let mut blocks: Vec<Vec<usize>> = (0..lead).map(|i| vec![i]).collect();
        let mut next = lead;
        for w in &self.sorted_weights {
            let k = count_of(w)?;
            blocks.push((next..next + k).collect());
            next += k;
        }
        debug_assert_eq!(next, ambient.len());
        Ok(Transversal { partition: Partition::from_blocks(ambient.clone(), blocks)?, continuum_blocks: lead })
    }
}

/// A canonical transversal: the partition together with how many of its
/// leading singleton blocks stand for the nonatomic part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transversal {
    pub partition: Partition,
    pub continuum_blocks: usize,
}

impl Transversal {
    /// Invariant of the quotient, folding the continuum blocks back into `m0`.
    pub fn quotient_invariant(&self) -> RokhlinInvariant {
        let masses = self.partition.block_masses();
        let (lead, rest) = masses.split_at(self.continuum_blocks);
        let m0 = sum(lead);
        let mut sorted_weights = rest.to_vec();
        sorted_weights.sort_by(|a, b| b.cmp(a));
        RokhlinInvariant { m0, sorted_weights }
    }
}
