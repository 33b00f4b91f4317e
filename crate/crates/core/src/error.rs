use thiserror::Error;

/// Errors produced by model construction, solution and post-processing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("singular or inverted element Jacobian (det = {det:e})")]
    SingularJacobian { det: f64 },

    #[error("incompatible discretization: {0}")]
    IncompatibleDiscretization(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("linear solver failure: {0}")]
    SolverFailure(String),

    #[error("Newton iteration did not converge after {iterations} iterations (last eta = {last_eta:e})")]
    NonConvergence {
        iterations: usize,
        last_eta: f64,
        history: Vec<crate::solver::IterationRecord>,
    },

    #[error("Newton iteration diverged at iteration {iteration} (eta = {eta:e})")]
    Divergence {
        iteration: usize,
        eta: f64,
        history: Vec<crate::solver::IterationRecord>,
    },

    #[error("solution is not converged; refusing to post-process")]
    Unconverged,

    #[error("undefined effective thickness: {0}")]
    UndefinedThickness(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Iteration history carried by Newton failures, empty otherwise.
    pub fn history(&self) -> &[crate::solver::IterationRecord] {
        match self {
            Error::NonConvergence { history, .. } | Error::Divergence { history, .. } => history,
            _ => &[],
        }
    }
}
