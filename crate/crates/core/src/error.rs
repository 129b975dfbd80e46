use thiserror::Error;

use crate::numeric::{format_rational, Rational};

fn at(t: &Option<Rational>) -> String {
    t.as_ref().map(|t| format!(" at t = {}", format_rational(t))).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-canonical input: {0}")]
    NonCanonicalInput(String),
    #[error("function is not non-increasing")]
    NotMonotone,
    #[error("geometric base must exceed 1, got {0}")]
    BadBase(f64),
    #[error("operands live on different domains")]
    AlphaMismatch,
    #[error("majorization hypothesis fails{}", at(.witness))]
    NotMajorized { witness: Option<Rational> },
    #[error("no level equalizes the norms: target norm is already exceeded")]
    NoFeasibleLevel,
    #[error("exponents out of range: p = {p}, q = {q}")]
    BadExponents { p: f64, q: f64 },
    #[error("vectors have unequal sums")]
    UnequalSums,
    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),
    #[error("decomposition hypothesis fails at t = {}", format_rational(.witness))]
    HypothesisFailed { witness: Rational },
    #[error("construction violated its own postcondition: {0}")]
    PostconditionViolated(String),
    #[error("norms differ: {0}")]
    NormMismatch(String),
    #[error("function is not constant on the grid of level {0}")]
    GridMismatch(u32),
    #[error("exponent ordering does not admit a failure family: {0}")]
    BadRegime(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Errors that report a failed mathematical hypothesis rather than misuse.
    pub fn is_violation(&self) -> bool {
        matches!(
            self,
            Error::NotMajorized { .. }
                | Error::NoFeasibleLevel
                | Error::HypothesisFailed { .. }
                | Error::UnequalSums
                | Error::NormMismatch(_)
                | Error::PostconditionViolated(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
