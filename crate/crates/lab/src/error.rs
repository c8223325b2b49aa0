use std::path::{Path, PathBuf};

use annealpath_core::Error as CoreError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

/// Exit code for invalid input (configuration, parameters, models).
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for failures while running (simulation, I/O).
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing input: {0}")]
    Missing(String),
}

impl LabError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Missing(_) => EXIT_VALIDATION,
            LabError::Io { .. } => EXIT_RUNTIME,
            LabError::Core(e) => match e {
                CoreError::Simulation(_) | CoreError::SingularKernel { .. } | CoreError::Io(_) => {
                    EXIT_RUNTIME
                }
                _ => EXIT_VALIDATION,
            },
        }
    }
}
