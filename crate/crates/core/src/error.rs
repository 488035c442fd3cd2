use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("unphysical covariance matrix: {0}")]
    Unphysical(String),

    #[error("steady-state fixed point did not converge after {iterations} iterations (last relative change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("coupling target unreachable: {0}")]
    UnreachableTarget(String),

    #[error("eigenvalue iteration failed for a {0}x{0} matrix")]
    EigenFailure(usize),

    #[error("drift matrix is not stable")]
    Unstable,

    #[error("linear system is singular")]
    SingularSystem,

    #[error("truncation dimension {dim} too small: leaked probability {leak:e} exceeds {tol:e}")]
    TruncationTooSmall { dim: usize, leak: f64, tol: f64 },
}
