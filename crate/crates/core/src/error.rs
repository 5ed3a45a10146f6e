use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index set of cardinality {requested} exceeds the cap of {cap}")]
    SizeLimit { requested: u128, cap: usize },

    #[error("invalid sample budget: {0}")]
    InvalidBudget(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("point {point:?} lies outside the bounding box (-{half_width}, {half_width})^d")]
    OutsideBox { point: Vec<f64>, half_width: f64 },

    #[error(
        "rejection sampling gave up after {proposals} proposals with {accepted} accepted \
         (empirical acceptance rate {acceptance_rate:.3e})"
    )]
    SamplingFailure {
        proposals: u64,
        accepted: usize,
        acceptance_rate: f64,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
