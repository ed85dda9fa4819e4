use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),
    #[error("singular representation: {0}")]
    SingularRepresentation(String),
    #[error("invalid driving configuration: {0}")]
    InvalidDriving(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("site {site} out of range 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("null space has dimension {0}, expected 1")]
    NonUniqueFixedPoint(usize),
    #[error("system too large: {0}")]
    TooLarge(String),
    #[error("cutoff not exact: {0}")]
    CutoffMismatch(String),
    #[error("fit refused: {0}")]
    FitRefused(String),
    #[error("inconsistent result: {0}")]
    Inconsistent(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed data file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
