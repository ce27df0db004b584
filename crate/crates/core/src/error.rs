use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurvError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("chart domain does not describe a closed manifold: {0}")]
    NotClosed(String),

    #[error("metric is not Einstein (max defect {defect:.3e})")]
    NotEinstein { defect: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid mode: {0}")]
    InvalidMode(String),

    #[error("argument outside the admissible domain: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("tolerance exceeded: {what} (error {err:.3e} > {tol:.3e})")]
    Tolerance { what: String, err: f64, tol: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CurvError>;
