use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the forecasting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("table has no datetime column")]
    NoDatetimeColumn,

    #[error("table declares more than one datetime column ({0} and {1})")]
    MultipleDatetimeColumns(String, String),

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("table has no data rows")]
    NoRows,

    #[error("cannot parse timestamp `{value}` on row {row}")]
    BadTimestamp { row: usize, value: String },

    #[error("numeric column `{0}` has no observed values")]
    AllMissing(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("series of length {len} is too short: need at least {required} rows")]
    TooShort { len: usize, required: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("candidate {variant} requires {requirement}")]
    MissingPreprocessing {
        variant: String,
        requirement: &'static str,
    },

    #[error("non-finite gradient in parameter `{0}`")]
    NonFiniteGradient(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("adversarial training produced a non-finite {what} at epoch {epoch}, batch {batch}")]
    GanDiverged {
        epoch: usize,
        batch: usize,
        what: &'static str,
    },

    #[error("every candidate failed: {0}")]
    AllCandidatesFailed(String),

    #[error("malformed model file: {0}")]
    BadModelFile(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wrap an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for failures of the numerics (divergence, non-finite values)
    /// as opposed to bad input or configuration.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonFiniteGradient(_)
            | Error::Diverged { .. }
            | Error::GanDiverged { .. }
            | Error::AllCandidatesFailed(_) => true,
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
