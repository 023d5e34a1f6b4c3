use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("scenario `{0}` is neither a file, an entry of the scenario directory nor a built-in")]
    ScenarioNotFound(String),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] tbopt::Error),

    #[error("{0}")]
    NotConverged(String),

    #[error("{0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    pub fn csv(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> Self {
        let path = path.into();
        move |source| Self::Csv { path, source }
    }

    pub fn exit_code(&self) -> ExitCode {
        use tbopt::Error as E;
        let code = match self {
            Self::Io { .. } | Self::Csv { .. } | Self::ScenarioNotFound(_) => 4,
            Self::Invalid(_) => 2,
            Self::Core(E::NonFinite { .. } | E::DegeneratePopulation { .. }) => 3,
            Self::Core(_) => 2,
            Self::NotConverged(_) => 3,
            Self::VerifyFailed(_) => 1,
        };
        ExitCode::from(code)
    }
}

pub type CliResult<T> = Result<T, CliError>;
