use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error("{diverged} of {total} images diverged during training, above the 5% limit")]
    DivergenceRate { diverged: usize, total: usize },
    #[error("output path {0:?} escapes the output directory")]
    OutsideOutput(String),
    #[error(transparent)]
    Core(#[from] coconet::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Core(coconet::Error::InvalidInput(_)) => 2,
            HarnessError::Dataset(_) => 3,
            HarnessError::Core(
                coconet::Error::Format { .. }
                | coconet::Error::ChecksumMismatch { .. }
                | coconet::Error::VersionMismatch { .. }
                | coconet::Error::PayloadLength { .. }
                | coconet::Error::ConventionMismatch { .. },
            ) => 3,
            HarnessError::DivergenceRate { .. } => 4,
            _ => 1,
        }
    }
}
