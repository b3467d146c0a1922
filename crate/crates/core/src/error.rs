use thiserror::Error;

/// Errors produced anywhere in the training pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {actual})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("ragged table at line {line}: expected {expected} fields, found {actual}")]
    Shape {
        line: usize,
        expected: usize,
        actual: usize,
    },

    #[error("AUC is undefined when only one class is present")]
    AucUndefined,

    #[error("polynomial fit failed: {0}")]
    FitFailed(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("slot capacity exceeded: need {needed} slots, have {available}")]
    Capacity { needed: usize, available: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the numbers themselves rather than by the input files or flags.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::AucUndefined | Error::FitFailed(_) | Error::Numerical(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            actual,
        })
    }
}
