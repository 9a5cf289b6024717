use std::io;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const IO: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const SHAPE: u8 = 3;
    pub const CONFIG: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] dalex::Error),

    #[error("config file {path}: {source}")]
    ConfigFile { path: String, source: toml::de::Error },

    #[error("config error: key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(context: impl Into<String>) -> impl FnOnce(io::Error) -> Self {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }

    pub fn exit_code(&self) -> u8 {
        use dalex::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Parse { .. } | E::NonFinite { .. } => exit::PARSE,
                E::Shape(_) | E::Support(_) | E::Empty(_) => exit::SHAPE,
                E::Config { .. }
                | E::TooLarge { .. }
                | E::Distribution(_)
                | E::ClassOutOfRange { .. }
                | E::UndefinedRatio => exit::CONFIG,
                E::Io(_) => exit::IO,
            },
            CliError::ConfigFile { .. } | CliError::Config { .. } => exit::CONFIG,
            CliError::Io { .. } | CliError::Json(_) => exit::IO,
        }
    }
}

/// Qualifies a core config error's key with its file section.
pub fn in_section(section: &str) -> impl Fn(dalex::Error) -> CliError + '_ {
    move |e| match e {
        dalex::Error::Config { key, message } => CliError::Config {
            key: format!("{section}.{key}"),
            message,
        },
        other => CliError::Core(other),
    }
}

pub type CliResult<T> = Result<T, CliError>;
