use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis mismatch: `{left}` vs `{right}`")]
    BasisMismatch { left: String, right: String },

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("input is not normalized (norm {0:.15})")]
    NotNormalized(f64),

    #[error("projectors do not sum to the identity (deviation {0:.3e})")]
    NotResolution(f64),

    #[error("projectors {0} and {1} are not mutually orthogonal")]
    NotOrthogonal(usize, usize),

    #[error("vector has no component in the requested sector (norm {0:.3e})")]
    ZeroNorm(f64),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("region [{lo}, {hi}) is invalid on a lattice of {n} sites")]
    InvalidRegion { lo: usize, hi: usize, n: usize },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("envelope does not fit support: {0}")]
    EnvelopeDoesNotFit(String),

    #[error("packet supports overlap; indistinguishable statistics need disjoint supports")]
    OverlappingSupports,

    #[error("post-selection discarded all weight")]
    EmptySelection,

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
