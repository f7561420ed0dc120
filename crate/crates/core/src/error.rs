use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("dense size {size} exceeds cap {cap}; use the factored path")]
    DenseCapExceeded { size: usize, cap: usize },

    #[error("state vector is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mixture weights must be nonnegative and sum to 1 (sum = {sum})")]
    WeightNotNormalized { sum: f64 },

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("query has no tokens")]
    EmptyQuery,

    #[error("rank {rank} exceeds the limit {max} for this tensor shape")]
    RankTooLarge { rank: usize, max: usize },

    #[error("no candidates to score")]
    NoCandidates,

    #[error("score {index} is not finite")]
    NonFiniteScore { index: usize },

    #[error("temperature {0} outside [1e-3, 1e3]")]
    InvalidTemperature(f64),

    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension {0} is not divisible by 3")]
    DimensionNotDivisible(usize),

    #[error("invalid label {0}; expected -1, 0 or 1")]
    InvalidLabel(i64),

    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("line {line}: bad label {label:?}")]
    BadLabel { line: usize, label: String },

    #[error("document {doc:?} has no candidate labeled +1")]
    MissingPositiveCandidate { doc: String },

    #[error("document {doc:?} has fewer than 2 candidates")]
    TooFewCandidates { doc: String },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("invalid corpus generator settings: {0}")]
    SpecInvalid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("checkpoint version mismatch: found {found:?}")]
    VersionMismatch { found: String },

    #[error("unknown document {0:?}")]
    UnknownDocument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
