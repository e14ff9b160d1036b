//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failure modes of the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An outcome violates the time-delay bound of its measurement step.
    #[error("outcome at measurement {index} is infeasible: dq = {dq} lies outside the time-delay bound ±{bound}")]
    Infeasible { index: usize, dq: f64, bound: f64 },

    #[error("unsupported regime: {0}")]
    Regime(String),

    #[error("quadrature did not converge: achieved relative error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// The monotone saddle-point equation has no root inside the search bracket.
    #[error("saddle-point root not bracketed within |lambda| <= {limit}")]
    SaddleBoundary { limit: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("sampling failed: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, Error>;
