use std::path::PathBuf;

use thiserror::Error;

use crate::model::TaskId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("task {0} fits no task class")]
    Unclassifiable(TaskId),

    #[error("task {task} was queued as class {queue} but classifies as {actual:?}")]
    ClassMismatch {
        task: TaskId,
        queue: usize,
        actual: Option<usize>,
    },

    #[error("ARR tuning did not converge for target {target:.2}: best achieved {best:.4}")]
    Tuning { target: f64, best: f64 },

    #[error("degenerate least-squares fit: {0}")]
    DegenerateFit(String),

    #[error("synthetic profile error: {0}")]
    Profile(String),

    #[error("trace validation found {0} violation(s)")]
    Validation(usize),

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn parse(source_name: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::Config(_) | Error::Profile(_) => 1,
            Error::Usage(_) => 2,
            Error::Validation(_) => 3,
            Error::Tuning { .. } | Error::DegenerateFit(_) => 4,
            Error::Unclassifiable(_) | Error::ClassMismatch { .. } => 1,
        }
    }
}
