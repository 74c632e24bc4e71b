use num_complex::Complex64;
use thiserror::Error;

/// Failures surfaced by the numerical routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("pole hit: factor {index} of a negative-index q-Pochhammer is {modulus:e} from zero")]
    PoleHit { index: i64, modulus: f64 },

    #[error("infinite product did not reach tolerance within {cap} factors")]
    TruncationCap { cap: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("N = {n} is too small for the boundary encoding: {reason}")]
    InvalidN { n: usize, reason: String },

    #[error("absorption not reached within {cap} steps")]
    StepCap { cap: usize },

    #[error("matrix is numerically singular (condition estimate {cond:e})")]
    Singular { cond: f64 },

    #[error("no separating annulus: {0}")]
    NoSeparatingAnnulus(String),

    #[error("no convergence at {nodes} nodes: last {last}, previous {prev}")]
    NonConvergence {
        last: Complex64,
        prev: Complex64,
        nodes: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("root solver failed: {0}")]
    RootSolver(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
