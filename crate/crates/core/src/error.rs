use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solvers and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no finite radius: integration reached xi = {xi_max} without a zero of u")]
    NoFiniteRadius { xi_max: f64 },

    #[error("quadrature failed to reach tolerance {tol:e} on [{lo}, {hi}] within {panels} panels")]
    QuadratureFailure {
        lo: f64,
        hi: f64,
        tol: f64,
        panels: usize,
    },

    #[error("mass {target} unreachable inside the validity region (max attainable {attainable} at alpha = {alpha_max})")]
    BoundaryHit {
        target: f64,
        attainable: f64,
        alpha_max: f64,
    },

    #[error("fixed-point iteration did not converge in {iterations} iterations (last relative change {change:e})")]
    NonConvergence { iterations: usize, change: f64 },

    #[error("density is positive on the outermost grid ring (iteration {iteration})")]
    SupportOverflow { iteration: usize },

    #[error("invalid initial density: {0}")]
    InvalidInit(String),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("malformed data in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}
