use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid support: {0}")]
    Support(String),

    #[error("config error: key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("class index {index} out of range for {classes} classes")]
    ClassOutOfRange { index: usize, classes: usize },

    #[error("instance too large for exact enumeration: {classes} classes, {cases} cases (limit {max_classes} classes, {max_cases} cases)")]
    TooLarge {
        classes: usize,
        cases: usize,
        max_classes: usize,
        max_cases: usize,
    },

    #[error("distribution error: {0}")]
    Distribution(String),

    #[error("probability ratio undefined: reference probability is zero")]
    UndefinedRatio,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
