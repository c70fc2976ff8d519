use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("scalar mode conflict: {0}")]
    ModeConflict(String),

    #[error("invalid scalar literal {0:?}")]
    InvalidLiteral(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("excluded exponent {exponent}: the stability constant needs p != 1, 3")]
    ExcludedExponent { exponent: f64 },

    #[error("divergent series for the {component} component")]
    Divergent { component: String },

    #[error("overflow guard tripped at iterate {index}: |f| = {magnitude:e} exceeds 2^500")]
    Overflow { index: usize, magnitude: f64 },

    #[error("no certified envelope: {0}")]
    Uncertifiable(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
