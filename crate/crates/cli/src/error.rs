use fermi_stability::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Domain(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                Error::NonConvergence { .. }
                | Error::NoSignChange { .. }
                | Error::GridTooCoarse { .. }
                | Error::TruncationWarning { .. } => 3,
                _ => 2,
            },
        }
    }
}
