use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid input: non-positive radius, bad index set, rule sizes below minimum, ...
    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    /// Evaluation point too close to the boundary for the requested rule.
    #[error("near-singular evaluation: point {point} is within margin {margin} of the boundary of factor {factor}")]
    NearSingular {
        factor: usize,
        point: String,
        margin: f64,
    },

    /// NaN/Inf, division by zero or a singular kernel configuration.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Nested quadrature whose cost grows past the configured guard.
    #[error("cost guard: {0} (set allow_large to override)")]
    CostGuard(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for errors caused by the input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Parse(_) | Error::CostGuard(_)
        )
    }
}
