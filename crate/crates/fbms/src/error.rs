use std::io;
use std::path::{Path, PathBuf};

/// Errors of the command line layer.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Core(#[from] fbms_core::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    /// 2 for bad input, 3 for everything that went wrong while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Parse { .. } => 2,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Parse { .. } => "parse",
            Self::Io { .. } => "io",
            Self::Core(_) => "core",
            Self::Json(_) => "json",
            Self::Csv(_) => "csv",
            Self::Pool(_) => "pool",
        }
    }

    pub(crate) fn io(path: &Path) -> impl FnOnce(io::Error) -> Self + '_ {
        move |source| Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
