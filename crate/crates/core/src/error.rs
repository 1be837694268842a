use thiserror::Error;

/// Errors raised by network construction, evaluation and the numerical harnesses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix has {rows}x{cols} shape but {len} entries")]
    BadMatrixShape { rows: usize, cols: usize, len: usize },

    #[error("matrix dimensions must be positive (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("non-finite entry in {context}")]
    NonFinite { context: String },

    #[error("layer {layer}: expected input of length {expected}, got {got}")]
    DimensionMismatch {
        layer: usize,
        expected: usize,
        got: usize,
    },

    #[error("network has no weight matrices")]
    EmptyNetwork,

    #[error("activation mismatch: {left} vs {right}")]
    ActivationMismatch { left: String, right: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("construction bound violated: {0}")]
    BoundViolated(String),

    #[error("missing series coefficient for multi-index {0:?}")]
    MissingCoefficient(Vec<u32>),

    #[error("Chebyshev degree {0} exceeds the exact range (max 60)")]
    DegreeOverflow(usize),

    #[error("target evaluator returned a non-finite value at {0:?}")]
    FitFailure(Vec<f64>),

    #[error("sampled network has path norm {path_norm} above the cap {cap}")]
    CapViolated { path_norm: f64, cap: f64 },

    #[error("training diverged: objective {objective} exceeds {limit}")]
    Diverged { objective: f64, limit: f64 },

    #[error("serialization: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
