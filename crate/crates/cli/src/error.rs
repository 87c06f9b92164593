use thiserror::Error;

/// Failures of a run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum RunError {
    /// Invalid configuration or parameters; nothing is written.
    #[error("config error: {0}")]
    Config(String),
    /// A numerical routine stopped short of its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

impl From<maxtrunc_core::Error> for RunError {
    fn from(e: maxtrunc_core::Error) -> Self {
        use maxtrunc_core::Error as E;
        match e {
            E::NonConvergence { .. } | E::NonFinite(_) | E::Unrepresentable(_) => RunError::Numerical(e.to_string()),
            E::InvalidExponent(_)
            | E::DimensionMismatch { .. }
            | E::InvalidArgument(_)
            | E::Precondition(_)
            | E::Budget { .. } => RunError::Config(e.to_string()),
        }
    }
}
