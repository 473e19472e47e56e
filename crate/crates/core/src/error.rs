use thiserror::Error;

use crate::solver::IterationHistory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed grid, config file or catalog key.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numeric parameter outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Input data that violates a structural requirement (symmetry, ellipticity).
    #[error("validation error: {0}")]
    Validation(String),

    /// Mismatched shapes or grids.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("growth exponent q = {q} is outside [0, 1)")]
    InvalidGrowth { q: f64 },

    #[error("CG did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    CgFailure { iterations: usize, residual: f64 },

    #[error("Picard iteration did not converge in {iterations} iterations (last change {last_change:.3e})")]
    PicardNonConvergence {
        iterations: usize,
        last_change: f64,
        history: Box<IterationHistory>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of an iterative solver, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::CgFailure { .. } | Error::PicardNonConvergence { .. })
    }
}
