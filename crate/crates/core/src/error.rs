use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fairness level {tau} is not attainable for {form}")]
    InvalidLevel { tau: f64, form: &'static str },

    #[error("degenerate class: {0} has zero mass")]
    DegenerateClass(String),

    #[error("ratio is undefined: {0}")]
    UndefinedRatio(&'static str),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("sample is empty")]
    EmptySample,

    #[error("label channel {0} has no usable rows")]
    EmptyChannel(String),

    #[error("objective became non-finite after {iterations} iterations")]
    NonFinite { iterations: usize },

    #[error("parse error at row {row}, column `{column}`: {msg}")]
    Parse {
        row: usize,
        column: String,
        msg: String,
    },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("column `{column}` is not binary: {msg}")]
    NonBinaryLabel { column: String, msg: String },

    #[error("sample of {0} rows is too small to split")]
    TooSmall(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    /// Process exit code: 3 for infeasible levels, 4 for degenerate metrics,
    /// 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidLevel { .. } | Error::Infeasible(_) => 3,
            Error::DegenerateClass(_) | Error::UndefinedRatio(_) | Error::NonFinite { .. } => 4,
            _ => 2,
        }
    }

    /// Short machine-readable name.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidProbability { .. } => "invalid_probability",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InvalidLevel { .. } => "invalid_level",
            Error::DegenerateClass(_) => "degenerate_class",
            Error::UndefinedRatio(_) => "undefined_ratio",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::EmptySample => "empty_sample",
            Error::EmptyChannel(_) => "empty_channel",
            Error::NonFinite { .. } => "non_finite",
            Error::Parse { .. } => "parse",
            Error::SchemaMismatch(_) => "schema_mismatch",
            Error::NonBinaryLabel { .. } => "non_binary_label",
            Error::TooSmall(_) => "too_small",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Config(_) => "config",
            Error::Infeasible(_) => "infeasible",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
