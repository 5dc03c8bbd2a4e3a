//! Exact finite-scale machinery for Lebesgue-Rokhlin probability spaces.
//!
//! Spaces carry exact rational atom weights plus a symbolic nonatomic mass.
//! Sub-sigma-fields are partitions of atoms, conditional expectations are
//! block-averaging projections, and every classification question
//! (spaces, morphisms, filtrations, orbits) is answered by a canonical form
//! that can be compared for equality.
//!
//! All decisions are made in exact arithmetic ([`Rational`]); floats appear
//! only in rendered output.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod filtration;
pub mod hyperspace;
pub mod io;
pub mod morphism;
pub mod partition;
pub mod process;
pub mod rational;
pub mod space;

pub use error::{Error, Result};
pub use experiments::{Automorphism, ExperimentReport};
pub use filtration::{Decision, Filtration, FiltrationInvariant, ImmersionReport};
pub use hyperspace::FiniteMetricSpace;
pub use morphism::{Morphism, MorphismInvariant};
pub use partition::{CondExpOperator, Partition, ProbeSequence};
pub use process::ProcessTree;
pub use rational::Rational;
pub use space::{ProbSpace, RokhlinInvariant, Transversal};
