use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("quadrature did not converge: estimated error {est_error:e} on value {value:e}")]
    QuadratureFailed { value: f64, est_error: f64 },
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("geometry probe failed: {0}")]
    GeometryFailed(String),
    #[error("solver failed: {0}")]
    SolverFailed(String),
    #[error("field is not localized: |u| = {value:e} at the box boundary")]
    NotLocalized { value: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
