use thiserror::Error;

use crate::entropy::BitstreamError;
use crate::partition::PartitionError;
use crate::ply::PlyError;
use crate::transform::lambda::LambdaFitError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Ply(#[from] PlyError),
    #[error(transparent)]
    Bitstream(#[from] BitstreamError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    LambdaFit(#[from] LambdaFitError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("geometry has {found} points but the bitstream codes {expected}")]
    GeometryMismatch { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Metric(String),
}

/// Coarse failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Format,
    Argument,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io(_) | Error::Ply(PlyError::Io(_)) => ErrorKind::Io,
            Error::Csv(e) if e.is_io_error() => ErrorKind::Io,
            Error::Ply(_) | Error::Bitstream(_) | Error::Csv(_) | Error::GeometryMismatch { .. } => {
                ErrorKind::Format
            }
            Error::LambdaFit(LambdaFitError::Parse(_)) => ErrorKind::Format,
            Error::Partition(_) | Error::LambdaFit(_) | Error::Config(_) | Error::Metric(_) => {
                ErrorKind::Argument
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
