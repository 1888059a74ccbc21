use thiserror::Error;

use crate::params::ParamViolation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Params(#[from] ParamViolation),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no convergence in {what} (achieved error estimate {achieved:.3e})")]
    NoConvergence { what: String, achieved: f64 },
    #[error("linear algebra failure: {0}")]
    LinAlg(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn no_convergence(what: impl Into<String>, achieved: f64) -> Self {
        Error::NoConvergence {
            what: what.into(),
            achieved,
        }
    }
}
