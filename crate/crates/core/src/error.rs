use thiserror::Error;

/// Errors raised by the extended-tensor library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("unknown metric preset `{0}` (expected `euclidean3` or `minkowski4`)")]
    UnknownPreset(String),

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("tensor is not antisymmetric (max asymmetry {max_asymmetry:e})")]
    NotAntisymmetric { max_asymmetry: f64 },

    #[error("operation needs base dimension {expected}, metric has {found}")]
    UnsupportedDimension { expected: usize, found: usize },

    #[error("map is not an isometry of the base metric (residual {residual:e})")]
    NotIsometry { residual: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("matrix exponential argument too large (norm {norm:e})")]
    Overflow { norm: f64 },

    #[error("state is not a rigid motion: {0}")]
    NotRigid(String),

    #[error("particle count mismatch: {left} vs {right}")]
    ParticleCount { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluator failed: {0}")]
    Evaluator(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
