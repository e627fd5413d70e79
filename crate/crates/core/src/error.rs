use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The response matrix is (numerically) singular: `|det H|` fell below the tolerance.
    #[error("singular response: |det H| = {det_abs:e} is below tolerance {tolerance:e}")]
    SingularResponse { det_abs: f64, tolerance: f64 },

    /// At least one eigenvalue of the effective Hamiltonian has a non-negative
    /// imaginary part, so no steady state exists.
    #[error("dynamically unstable: max Im(lambda) = {max_imag:e} is not negative")]
    Unstable { max_imag: f64 },

    #[error("Fock truncation too small: {what} = {value:e} exceeds {limit:e}")]
    TruncationTooSmall {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("step-size controller failed at t = {t}: step {step:e} below minimum")]
    StepFailure { t: f64, step: f64 },

    #[error("insufficient grid: {valid} valid points, at least {required} required")]
    InsufficientGrid { valid: usize, required: usize },

    /// Both sensitivities vanish; the Cramér-Rao bound is infinite.
    #[error("zero Fisher information: the state does not depend on the parameter")]
    ZeroInformation,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigendecomposition failed to converge")]
    Eigen,
}

pub type Result<T> = std::result::Result<T, Error>;
