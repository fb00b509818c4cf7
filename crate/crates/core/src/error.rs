//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, got n = {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector field index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular weight: eps = 0 with p < 2 and a zero-gradient node")]
    SingularWeight,

    #[error("g not positive at sample x = {0}")]
    GNotPositive(f64),

    #[error("g is not admissible: worst (PC) margin {0} at sampled points")]
    GNotAdmissible(f64),

    #[error("v must be positive a.e.: v = {value} at interior node {node}")]
    VNotPositive { node: usize, value: f64 },

    #[error("v is not a supersolution: min interior -Delta_p v = {0}")]
    NotSupersolution(f64),

    #[error("divergence: energy became non-finite at iteration {0}")]
    Divergence(usize),

    #[error("iteration did not converge after {iterations} steps; last values {trace:?}")]
    NonConvergence { iterations: usize, trace: Vec<f64> },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
