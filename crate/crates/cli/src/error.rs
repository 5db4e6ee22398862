use eduverba_core::dataset::DatasetError;
use eduverba_core::generate::GenerateError;
use eduverba_core::grid::GridError;
use eduverba_core::ingest::IngestError;
use eduverba_core::pipeline::PipelineError;
use eduverba_core::prompt::PromptError;
use eduverba_core::rating::RatingError;
use thiserror::Error;

use crate::serve::ServeError;

/// Top-level failure, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable config or missing input files.
    #[error("{0}")]
    Config(String),
    /// The page source or model endpoint failed.
    #[error("{0}")]
    Source(String),
    /// Inputs were read but do not satisfy the data rules.
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Source(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } => CliError::Config(e.to_string()),
            DatasetError::Prompt(_) => CliError::Config(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::EmptyConfig | PipelineError::Config(_) | PipelineError::Io { .. } => CliError::Config(e.to_string()),
            PipelineError::Stage { stage: "ingest" | "generate", .. } => CliError::Source(e.to_string()),
            PipelineError::Stage { .. } => CliError::Validation(e.to_string()),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::UnknownCategory(_) => CliError::Config(e.to_string()),
            _ => CliError::Source(e.to_string()),
        }
    }
}

impl From<GenerateError> for CliError {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::InvalidParams(_) => CliError::Config(e.to_string()),
            _ => CliError::Source(e.to_string()),
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::InvalidConfig(_) => CliError::Config(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<RatingError> for CliError {
    fn from(e: RatingError) -> Self {
        match e {
            RatingError::Io { .. } => CliError::Config(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PromptError> for CliError {
    fn from(e: PromptError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ServeError> for CliError {
    fn from(e: ServeError) -> Self {
        match e {
            ServeError::PortInUse(_) => CliError::Source(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub(crate) fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}
