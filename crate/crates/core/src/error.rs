use thiserror::Error;

use crate::profile::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid construction input (parameters, tables, grids).
    #[error("invalid input: {0}")]
    Config(String),

    /// Argument outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The nonlinearity fails one of the conditions required by the operation.
    #[error("nonlinearity violates a required condition: {0}")]
    Gate(String),

    #[error("quadrature did not converge: achieved error {achieved:e} > tolerance {tol:e}")]
    Quadrature { achieved: f64, tol: f64 },

    #[error("root finding failed: {0}")]
    Root(String),

    #[error("eigen-decomposition did not converge after {sweeps} sweeps")]
    Eigen { sweeps: usize },

    /// `|p|^alpha` with `p = 0` and `alpha < 0`.
    #[error("operator is singular at zero gradient for alpha = {alpha}")]
    Singular { alpha: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("integration failed at x = {x}: {reason}")]
    Integration {
        x: f64,
        reason: String,
        partial: Box<Trajectory>,
    },

    #[error("relaxation diverged after {steps} steps (residual {residual:e})")]
    Divergence {
        steps: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index ({i}, {j}) is not an interior node")]
    Index { i: usize, j: usize },

    #[error("sample at x1 = {x1} lies within {distance:e} of a seam")]
    Sampling { x1: f64, distance: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Domain(_)
                | Error::Precondition(_)
                | Error::Shape(_)
                | Error::Index { .. }
                | Error::Sampling { .. }
                | Error::Json(_)
        )
    }
}
