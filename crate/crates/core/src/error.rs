use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("channel vector has zero norm")]
    ZeroChannel,
    #[error("gap must be nonnegative, got {0}")]
    NegativeGap(f64),
    #[error("frame of {n} columns does not fit in dimension {m}")]
    FrameTooLarge { m: usize, n: usize },
    #[error("projection onto the full space is a point mass at r = 1")]
    DegenerateProjection,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("operation has no finite-SNR form at infinite SNR")]
    AsymptoticOnly,
    #[error("MMSE SNR differs across symbol indices (relative spread {spread:.3e})")]
    NonUniformSnr { spread: f64 },
    #[error("draw does not match scheme: {0}")]
    DrawMismatch(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("quadrature failed to reach tolerance {tol:.3e} (estimate {error_estimate:.3e} after {subdivisions} subdivisions)")]
    QuadratureFailure {
        tol: f64,
        error_estimate: f64,
        subdivisions: usize,
    },
    #[error("gap diverges at infinite SNR for {0} virtual antennas")]
    DivergentGap(usize),
}

impl Error {
    /// Numerical failures (as opposed to invalid arguments).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::QuadratureFailure { .. } | Error::NonUniformSnr { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
