use std::io;
use std::path::PathBuf;

/// Errors surfaced by the std companion crate and the CLI.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Core(#[from] hrs_core::Error),
}

impl SimError {
    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        SimError::Format { path: path.into(), reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        SimError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 config, 3 data format, 4 numerical consistency,
    /// 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use hrs_core::Error as E;
        match self {
            SimError::Config(_) => 2,
            SimError::Format { .. } => 3,
            SimError::Io { .. } => 1,
            SimError::Core(e) => match e {
                E::Numerical(_) => 4,
                E::Config(_)
                | E::DegenerateScenario(_)
                | E::Stratification(_)
                | E::ResourceGuard(_)
                | E::CalibrationNotApplicable { .. } => 2,
                _ => 1,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
