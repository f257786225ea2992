use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown series '{name}' (available: {available})")]
    UnknownSeries { name: String, available: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Module(#[from] freelab::Error),
    #[error("serialization: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        use freelab::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Config(_) | CliError::UnknownSeries { .. } => 2,
            CliError::Module(
                E::InvalidSeed { .. }
                | E::InvalidParameter { .. }
                | E::DimensionMismatch { .. }
                | E::NoSeeds
                | E::DuplicateLabel(_)
                | E::UnknownLabel(_)
                | E::Spectrum(_)
                | E::GridTooSmall { .. }
                | E::EmptySupport(_)
                | E::PrecedenceViolated,
            ) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
