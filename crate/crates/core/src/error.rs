use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),

    #[error("bearing is undefined between coincident points")]
    UndefinedBearing,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid money-line {0}: |odds| must be at least 100")]
    InvalidOdds(i32),

    #[error("implied probabilities sum to {0}, below 1: corrupted line data")]
    Underround(f64),

    #[error("{path}:{line}: field `{field}`: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        field: String,
        message: String,
    },

    #[error("{path}: unexpected header, expected `{expected}`")]
    Header { path: PathBuf, expected: String },

    #[error("{path}:{line}: duplicate key `{key}`")]
    Duplicate {
        path: PathBuf,
        line: u64,
        key: String,
    },

    #[error("unknown team `{0}` (no stadium record)")]
    UnknownTeam(String),

    #[error("empty sample: no rows survive exclusion")]
    EmptySample,

    #[error("rank-deficient design matrix; dependent columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),

    #[error("IRLS did not converge within {0} iterations")]
    NonConvergence(usize),

    #[error("perfect or quasi-perfect separation detected (|beta| = {0:.3e})")]
    Separation(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero standard error for `{0}`")]
    ZeroStandardError(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no trainable prior data before season {0}")]
    NoTrainingData(i32),

    #[error("feature `{0}` was not present when the model was fitted")]
    UnfittedFeature(String),

    #[error("clashing feature names across fits: {0}")]
    TableClash(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable snake-case code used by the CLI's error line and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidCoordinate(_) => "invalid_coordinate",
            Error::UndefinedBearing => "undefined_bearing",
            Error::InvalidInput(_) => "invalid_input",
            Error::InvalidOdds(_) => "invalid_odds",
            Error::Underround(_) => "underround",
            Error::Parse { .. } => "parse",
            Error::Header { .. } => "schema",
            Error::Duplicate { .. } => "duplicate",
            Error::UnknownTeam(_) => "unknown_team",
            Error::EmptySample => "empty_sample",
            Error::RankDeficient(_) => "rank_deficient",
            Error::NonConvergence(_) => "non_convergence",
            Error::Separation(_) => "separation",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::ZeroStandardError(_) => "zero_standard_error",
            Error::Config(_) => "config",
            Error::NoTrainingData(_) => "no_trainable_prior_data",
            Error::UnfittedFeature(_) => "unfitted_feature",
            Error::TableClash(_) => "table_clash",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: impl Into<PathBuf>,
        line: u64,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            field: field.into(),
            message: message.into(),
        }
    }
}
