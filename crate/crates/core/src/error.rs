use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("total mass is {0}, expected exactly 1")]
    MassMismatch(String),
    #[error("space has nonatomic mass {0}; materialize it first")]
    NotAtomic(String),
    #[error("objects live on different ambient spaces")]
    AmbientMismatch,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("prefix mass {mass} is not a multiple of the atom weight {atom}")]
    ResolutionMismatch { mass: String, atom: String },
    #[error("ambient space is not uniform")]
    NotUniform,
    #[error("factors are dependent{}", .time.map(|t| format!(" at grid index {t}")).unwrap_or_default())]
    DependentFactors { time: Option<usize> },
    #[error("second sigma-field does not refine the first")]
    NotRefining,
    #[error("distribution is not normalized: total {0}")]
    NonNormalized(String),
    #[error("process value at grid index {time} is not measurable with respect to its stage")]
    MeasurabilityViolation { time: usize },
    #[error("time grids do not match: {0} vs {1} stages")]
    GridMismatch(usize, usize),
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("permutation is not weight-preserving")]
    NotWeightPreserving,
    #[error("invalid metric space: {0}")]
    InvalidMetric(String),
    #[error("unknown point {0}")]
    UnknownPoint(usize),
    #[error("probe list does not enumerate every point")]
    IncompleteProbes,
    #[error("inclusion violated at index {0}")]
    InclusionViolation(usize),
    #[error("set at index {0} is not closed under the operation")]
    NotClosed(usize),
    #[error("operation undefined on ({0}, {1})")]
    OpPartial(usize, usize),
    #[error("{0} is out of range")]
    OutOfRange(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("schema violation: {0}")]
    Schema(String),
}
