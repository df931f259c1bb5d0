use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("error level {0} is invalid: expected 1e-12 <= delta < 1")]
    InvalidDelta(f64),

    #[error("risk level alpha = {0} is invalid: expected 0 < alpha <= 1")]
    InvalidAlpha(f64),

    #[error("support [{lo}, {hi}] is invalid: expected finite lo < hi")]
    InvalidSupport { lo: f64, hi: f64 },

    #[error("value {value} at position {index} lies outside the support [{lo}, {hi}]")]
    OutOfSupport {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("binomial count is invalid: {failures} failures out of {trials} trials")]
    InvalidCount { trials: u64, failures: u64 },

    #[error("probability {0} lies outside [0, 1]")]
    InvalidProbability(f64),

    #[error("{what} needs at least {needed} samples, got {got}")]
    TooFewSamples {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("bisection did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("grid index {index} is out of range for a grid of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("loss {value} at row {row}, column {column} is not binary")]
    NonBinary {
        row: usize,
        column: usize,
        value: f64,
    },

    #[error("budget split {delta1} + {delta2} does not add up to delta = {delta}")]
    InvalidSplit {
        delta: f64,
        delta1: f64,
        delta2: f64,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("missing {source_name} label for sample {sample}")]
    MissingLabel {
        source_name: &'static str,
        sample: String,
    },

    #[error("stage-1 and stage-2 sets share sample id {0}")]
    StageOverlap(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// True when the failure comes from the content of an input file rather
    /// than from how the tool was invoked.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::OutOfSupport { .. }
                | Error::NonBinary { .. }
                | Error::Shape(_)
                | Error::MissingLabel { .. }
                | Error::StageOverlap(_)
                | Error::Parse(_)
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
                | Error::EmptySample
                | Error::TooFewSamples { .. }
        )
    }
}
