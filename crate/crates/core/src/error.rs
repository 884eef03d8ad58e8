use thiserror::Error;

/// Errors raised by the rate, path, simulation and oracle routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("degenerate relative noise: sigma^2 + b^2 - 2 rho b sigma = {0}")]
    DegenerateNoise(f64),

    #[error("relative drift gamma_eps = {0} is not positive")]
    DriftNotPositive(f64),

    #[error("value {value} outside admissible range [0, {limit})")]
    OutOfRange { value: f64, limit: f64 },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("root finder did not converge in {0} iterations")]
    MaxIterations(usize),

    #[error("singular tridiagonal system (zero pivot at row {0})")]
    SingularMatrix(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no simulated path hit the boundary in {0} paths")]
    NoHit(usize),
}

impl Error {
    /// True for errors caused by inputs that fail a precondition, as opposed
    /// to numerical failures inside a solver.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameters(_)
                | Error::AssumptionViolated(_)
                | Error::DegenerateNoise(_)
                | Error::DriftNotPositive(_)
                | Error::OutOfRange { .. }
                | Error::InvalidConfig(_)
                | Error::DimensionMismatch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameters(msg()))
    }
}
