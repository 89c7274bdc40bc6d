use thiserror::Error;

use crate::zerofree::FailureReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero-free certificate failed: {0}")]
    NotCertified(FailureReport),

    #[error("work limit exceeded: {required} terms required, limit {limit}")]
    WorkLimit { required: u128, limit: u128 },

    #[error("brute-force size cap exceeded: n = {n}, cap = {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("factorization failed: residual {residual:e}")]
    Factorization { residual: f64 },

    #[error("rounding stopped at step {step} with {} variable(s) fixed: {source}", fixed.len())]
    RoundingStalled { step: usize, fixed: Vec<(usize, bool)>, source: Box<Error> },

    #[error("no interior point detected or ill-conditioned (residual {residual:e} after {iterations} iterations)")]
    NoInterior { residual: f64, iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
