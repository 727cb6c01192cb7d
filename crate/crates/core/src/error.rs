use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value is out of its admissible range.
    #[error("invalid `{key}`: {message}")]
    Validation { key: String, message: String },

    /// Probabilities that should be mutually consistent are not.
    #[error("inconsistent probabilities: {0}")]
    Inconsistent(String),

    /// A Pauli product picked up an imaginary phase.
    #[error("pauli product has phase ±i")]
    ImaginaryPhase,

    #[error("no crossing of the logical error rate curves inside the loss grid")]
    NoCrossing,

    #[error("logical error rate curves are identical; crossing is undefined")]
    DegenerateCrossing,

    #[error("{0}")]
    Runtime(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error class: 1 validation, 2 runtime, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } => 1,
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}
