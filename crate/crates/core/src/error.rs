use thiserror::Error;

use crate::diagnostics::DiagnosticsError;
use crate::dist::DistError;
use crate::extend::ExtendError;
use crate::ingest::IngestError;
use crate::ols::OlsError;
use crate::series::SeriesError;
use crate::synth::SynthError;

/// Union of the per-module error types.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Ols(#[from] OlsError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Extend(#[from] ExtendError),
}

pub type Result<T> = std::result::Result<T, Error>;
