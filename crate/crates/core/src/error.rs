use thiserror::Error;

/// Errors produced by the computational modules.
///
/// `Input` covers malformed parameters and violated preconditions; every other
/// variant signals a numerical failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("x = {x} lies outside the interval")]
    OutsideInterval { x: f64 },
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("lambda = {re}{im:+}i is not in the admissible half-plane")]
    NotAdmissible { re: f64, im: f64 },
    #[error("pole or singular denominator near lambda = {re}{im:+}i")]
    Pole { re: f64, im: f64 },
    #[error("inconsistent result: {0}")]
    Consistency(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for precondition and parsing failures, false for numerical ones.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input(_) | Error::OutsideInterval { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
