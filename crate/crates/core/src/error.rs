use thiserror::Error;

/// Errors produced by the numerical toolkit.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("axis sets overlap: {0}")]
    AxisOverlap(String),

    #[error("unknown axis or factor: {0}")]
    UnknownAxis(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("matrix is not column-stochastic: {0}")]
    NotStochastic(String),

    #[error("state space too large for exact enumeration: {size} > {limit}")]
    StateSpaceOverflow { size: usize, limit: usize },

    #[error("isometry constraint violated by tensor `{tensor}` (deviation {deviation:.3e})")]
    IsometryViolation { tensor: String, deviation: f64 },

    #[error("initial state is not the required thermal product state (deviation {0:.3e})")]
    InitialStateNotProduct(f64),

    #[error("trajectory has zero probability under the chain")]
    ZeroProbabilityTrajectory,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
