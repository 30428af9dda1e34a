use thiserror::Error;

/// Errors raised by the numerical kernels and model builders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{n_sites} sites exceeds the cap of {cap}")]
    SiteCapExceeded { n_sites: usize, cap: usize },

    #[error("operator is not flagged Hermitian")]
    NotHermitian,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("shifted solve stagnated at relative residual {residual:.3e}")]
    SolverStagnation { residual: f64 },

    #[error(
        "Krylov propagator could not reach tolerance {tol:.1e} within a subspace of {max_dim}"
    )]
    ToleranceUnreachable { tol: f64, max_dim: usize },

    #[error("dense linear algebra failed: {0}")]
    Dense(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
