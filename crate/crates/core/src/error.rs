use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The elliptic solve did not reach its tolerance. The residual history
    /// holds one relative residual per multigrid cycle or CG iteration block.
    #[error("elliptic solve failed after {iterations} iterations (last relative residual {:.3e})", residual_history.last().copied().unwrap_or(f64::NAN))]
    SolverFailure {
        iterations: usize,
        residual_history: Vec<f64>,
    },

    #[error("step rejected at t = {t:.6e} (dt = {dt:.3e}): {reason}")]
    StepRejected { t: f64, dt: f64, reason: String },

    /// A post-run check of a physical invariant failed.
    #[error("invariant breach: {0}")]
    InvariantBreach(String),

    #[error("uniqueness probe left the perturbative regime: {0}")]
    ProbeDiverged(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
