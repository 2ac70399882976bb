use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("step size underflow at t = {t:.6e}; the problem appears stiff")]
    Stiffness { t: f64 },
    #[error("trace drift {drift:.3e} exceeds {limit:.1e} at t = {t:.6e}")]
    TraceDrift { t: f64, drift: f64, limit: f64 },
    #[error("model is time dependent; a static generator is required here")]
    TimeDependent,
    #[error("steady state is not unique: null space has dimension {0}")]
    NonUniqueSteadyState(usize),
    #[error("dimension {dim} exceeds the dense-superoperator cap {cap}; use matrix-free evolve")]
    ResourceCap { dim: usize, cap: usize },
    #[error("trajectory too short: spans {span:.3}, need at least {required:.3} (units 1/gamma)")]
    TrajectoryTooShort { span: f64, required: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
