use thiserror::Error;

use crate::fit::FitParams;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to reach its requested accuracy.
    #[error("numerical error in {routine}: {detail}")]
    Numerical {
        routine: &'static str,
        detail: String,
    },

    #[error("root bracket failure: {0}")]
    Bracket(String),

    #[error("{source_name}: row {row}, column `{column}`: {message}")]
    Parse {
        source_name: String,
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid input data: {0}")]
    Data(String),

    #[error("fit did not converge after {iterations} iterations: {diagnostic}")]
    FitNotConverged {
        best: Box<FitParams>,
        iterations: usize,
        diagnostic: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            routine,
            detail: detail.into(),
        }
    }
}
