use alloc::string::String;

/// Errors produced by the statistics core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point set is empty")]
    EmptyPointSet,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("point set dimension must be at least 1")]
    ZeroDimension,

    #[error("split fractions must be positive and sum to 1 (sum = {sum})")]
    InvalidFractions { sum: f64 },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("k = {k} exceeds the number of distinct training points ({distinct})")]
    TooManyClusters { k: usize, distinct: usize },

    #[error("sample sizes differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("no represented cells: no cell passed the tau / min-cell inclusion rule")]
    NoRepresentedCells,

    #[error("kernel bandwidth is degenerate (median pairwise distance is zero)")]
    DegenerateBandwidth,

    #[error("histogram does not sum to 1 (sum = {sum})")]
    NotNormalized { sum: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
