use thiserror::Error;

use crate::eigensolve::EigenSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("potential is singular at {point:?}")]
    Singularity { point: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("states were built on different grids")]
    GridMismatch,

    #[error("state norm {norm} deviates from 1")]
    Normalization { norm: f64 },

    #[error("dense solve of dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("weight entry {index} is not positive ({value})")]
    InvalidWeight { index: usize, value: f64 },

    #[error(
        "eigensolver did not converge: {converged} of {requested} pairs within tolerance \
         (worst residual {worst_residual:.3e})"
    )]
    NotConverged {
        converged: usize,
        requested: usize,
        worst_residual: f64,
        partial: Box<EigenSolution>,
    },

    #[error("box truncation at R = {r} did not converge after {doublings} doublings")]
    Truncation { r: f64, doublings: usize },

    #[error("dense eigendecomposition failed")]
    Decomposition,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name: name.into(), reason: reason.into() }
    }

    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::NotConverged { .. } | Error::Truncation { .. })
    }
}
