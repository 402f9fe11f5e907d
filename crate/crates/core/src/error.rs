use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("buffer of length {len} does not hold {rows} x {dim} values")]
    ShapeMismatch { rows: usize, dim: usize, len: usize },

    #[error("sample sizes n={n}, m={m} are too small (each must be at least {min})")]
    SampleTooSmall { n: usize, m: usize, min: usize },

    #[error("pooled sample of {0} points exceeds the supported maximum")]
    PooledTooLarge(usize),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("labeling has {zeros} zeros and {ones} ones, expected {n} and {m}")]
    LabelCount {
        zeros: usize,
        ones: usize,
        n: usize,
        m: usize,
    },

    #[error("{count} labelings exceed the exhaustive cap of {cap}")]
    TooManyCombinations { count: u128, cap: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distance evaluated to an invalid value {0}")]
    InvalidDistance(f64),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}
