use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("variable {index}: value {value} outside its bounds")]
    OutOfBounds { index: usize, value: f64 },
    #[error("variable {index}: level {level} outside its level range")]
    LevelOutOfRange { index: usize, level: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("hyperparameter shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("matrix is not representable by the hypersphere parameterization: {0}")]
    NotRepresentable(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("objective failed at {point:?}: {source}")]
    ObjectiveFailure {
        point: Vec<f64>,
        #[source]
        source: Box<Error>,
    },
    #[error("all {0} starts failed")]
    AllStartsFailed(usize),
    #[error("grid of {size} points exceeds the cap of {cap}")]
    SizeOverflow { size: u128, cap: u128 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by a point not fitting its design space.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::OutOfBounds { .. } | Error::LevelOutOfRange { .. } | Error::DimensionMismatch { .. }
        )
    }
}
