use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MgcError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("matrix is not orthogonal (residual {residual:.3e})")]
    NotOrthogonal { residual: f64 },

    #[error("matrix is not antisymmetric (residual {residual:.3e})")]
    NotAntisymmetric { residual: f64 },

    #[error("invalid highest weight {parts:?} for n={n}, k={k}")]
    InvalidWeight { parts: Vec<i32>, n: usize, k: usize },

    #[error("invalid Gelfand-Tsetlin pattern {labels:?} for weight {weight:?}")]
    InvalidPattern { labels: Vec<i32>, weight: Vec<i32> },

    #[error("invalid occupancy: {0}")]
    InvalidOccupancy(String),

    #[error("infeasible pairing configuration: {0}")]
    InfeasibleConfig(String),

    #[error("invalid Casimir specification: {0}")]
    InvalidCasimir(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("capacity exceeded: {what} needs {requested}, limit is {limit}")]
    Capacity {
        what: String,
        requested: u128,
        limit: u128,
    },

    #[error("transition construction failed; attempted path {path:?}")]
    ConstructionFailure { path: Vec<String> },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("empty input: {0}")]
    Empty(String),
}

pub type Result<T> = std::result::Result<T, MgcError>;
