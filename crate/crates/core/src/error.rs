//! Error type shared across the pipeline.
//!
//! Exit-code convention for the CLI: configuration and usage problems map to
//! exit code 2, anything that fails while processing maps to exit code 1.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    /// Bad or missing configuration, unusable before any work starts.
    #[error("configuration error: {0}")]
    Config(String),

    /// An input path referenced by the configuration does not exist.
    #[error("missing input file: {}", path.display())]
    MissingInput { path: PathBuf },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed content in an input file, reported with its line number.
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    /// A value that is structurally fine but semantically unusable.
    #[error("{0}")]
    Invalid(String),

    #[error("no route between vertices {from} and {to}")]
    NoRoute { from: u32, to: u32 },

    #[error("pair sampling exhausted after {draws} draws")]
    SamplingExhausted { draws: u64 },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::MissingInput { .. } => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;
