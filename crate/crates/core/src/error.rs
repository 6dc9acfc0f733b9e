use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// No finite-valued rows survived ingestion.
    #[error("no finite-valued samples remain after filtering")]
    EmptyAfterFilter,

    /// Two coordinate vectors (or a grid and a sample set) disagree in length.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A sample row carries a NaN or infinite coordinate. Only the value
    /// column may be non-finite (that is how missing data is encoded).
    #[error("non-finite coordinate in sample row {row}")]
    NonFiniteCoordinate { row: usize },

    /// An axis range is empty, reversed, or has a nonpositive step.
    #[error("invalid axis range [{min}, {max}] with step {step}")]
    BadRange { min: f64, max: f64, step: f64 },

    /// A basis-function denominator fell below the degeneracy floor; the
    /// requested frequency is not constrained by the sampling.
    #[error("degenerate {which} denominator: frequency unconstrained by the sampling")]
    DegenerateDenominator { which: &'static str },

    /// The 2x2 normal-equation system cannot distinguish the two basis
    /// functions on this sampling.
    #[error("singular normal equations: sampling cannot distinguish sine from cosine")]
    SingularSystem,

    /// All sample values are equal, so no spectral normalization exists.
    #[error("sample values have zero variance")]
    ZeroVariance,

    /// Too few samples for the requested statistic.
    #[error("sample count {n} too small: {why}")]
    BadN { n: usize, why: &'static str },

    /// A gridded field contains no finite values at all.
    #[error("gridded field contains no finite values")]
    AllMissing,

    /// Samples do not lie on the grid they were claimed to come from.
    #[error("samples do not lie on the described grid")]
    GridMismatch,

    /// A parameter is out of its documented domain.
    #[error("invalid input: {0}")]
    BadInput(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// A text-format record failed to parse (1-based line number).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
