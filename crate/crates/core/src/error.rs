use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("parse error in `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("function is not differentiable here: pieces {active:?} are active")]
    AmbiguousDifferential { active: Vec<usize> },

    #[error("the norm is not smooth enough at the requested point ({0})")]
    NonsmoothPoint(String),

    #[error("argument must be nonzero ({0})")]
    ZeroArgument(&'static str),

    #[error("maximization did not converge; best bound found is {achieved}")]
    NonConvergence { achieved: f64 },

    #[error("operation requires {expected}")]
    WrongFamily { expected: &'static str },

    #[error("event limit of {0} exceeded while integrating")]
    TooManyEvents(usize),

    #[error("time {t} lies outside [0, {end}]")]
    TimeOutOfRange { t: f64, end: f64 },

    #[error("{0}")]
    Degenerate(String),

    #[error("construction not applicable: {0}")]
    NotApplicable(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by malformed user input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidParameter { .. }
                | Error::Parse { .. }
                | Error::WrongFamily { .. }
                | Error::NotApplicable(_)
                | Error::Empty(_)
                | Error::TimeOutOfRange { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: v.len(),
        });
    }
    Ok(())
}
