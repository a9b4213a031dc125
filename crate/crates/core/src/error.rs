use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("grid too small: tail mass {tail_mass:.3e} exceeds {limit:.1e}")]
    GridTooSmall { tail_mass: f64, limit: f64 },

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {error_estimate:.3e})")]
    QuadratureNonConvergence {
        subdivisions: usize,
        error_estimate: f64,
    },

    #[error("operation requires the zero-temperature regime, got T = {temperature}")]
    Regime { temperature: f64 },

    #[error("path endpoints differ by {mismatch:.3e}; the final-time delta constraint requires <= 1e-9")]
    EndpointMismatch { mismatch: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("history slots do not match: {0}")]
    MismatchedSlots(String),

    #[error("step size underflow at t = {t:.6e} (h = {step:.3e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("positivity violated at t = {t:.6e}: smallest eigenvalue {min_eigenvalue:.3e}")]
    PositivityViolation { t: f64, min_eigenvalue: f64 },

    #[error("Fock truncation exceeded at t = {t:.6e}: top-level population {population:.3e}")]
    TruncationExceeded { t: f64, population: f64 },

    #[error("nodal region: density {density:.3e} below threshold at grid index {index}")]
    NodalRegion { index: usize, density: f64 },

    #[error("dimension cap exceeded: {dim} > {cap}")]
    DimensionCap { dim: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
