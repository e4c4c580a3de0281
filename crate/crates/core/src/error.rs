use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by the linear algebra, sketching, solver, and
/// harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("projection onto a zero row is undefined")]
    ProjectionUndefined,

    #[error("noise-to-norm ratio undefined: row {0} is zero but carries nonzero noise")]
    UndefinedGamma(usize),

    #[error("sequence not sorted nonincreasing at position {0}")]
    UnsortedInput(usize),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
