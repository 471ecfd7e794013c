use thiserror::Error;

use monetif_core::Error as CoreError;

/// Failures grouped by the exit code they map to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("estimation error: {0}")]
    Estimation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Data(_) => 3,
            Self::Estimation(_) => 4,
        }
    }

    /// Tags a core error with the pipeline stage it came from.
    pub fn at(stage: &str, err: impl Into<CoreError>) -> Self {
        let err = err.into();
        let msg = format!("{stage}: {err}");
        match err {
            CoreError::Synth(monetif_core::synth::SynthError::InvalidConfig(_)) => Self::Config(msg),
            CoreError::Series(_) | CoreError::Ingest(_) | CoreError::Synth(_) => Self::Data(msg),
            CoreError::Dist(_) | CoreError::Ols(_) | CoreError::Diagnostics(_) | CoreError::Extend(_) => {
                Self::Estimation(msg)
            }
        }
    }

    pub fn io(what: &str, err: std::io::Error) -> Self {
        Self::Data(format!("{what}: {err}"))
    }
}
