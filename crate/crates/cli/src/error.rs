use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Domain(#[from] chandiv::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// 2 for unreadable input, 3 for valid input the library rejects,
    /// 4 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Parse(_) | Self::Usage(_) => 2,
            Self::Domain(_) => 3,
            Self::Io(_) | Self::Internal(_) => 4,
        }
    }
}
