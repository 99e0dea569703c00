use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input failed a structural precondition (dimensions, index range,
    /// Hermitian symmetry, unit norm, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A numeric routine could not complete (non-convergence, indefinite
    /// matrix, domain violation).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The receive beamformer is orthogonal to the direct link, so the
    /// direct-link SNR term of the closed-form rate is undefined.
    #[error("degenerate beam: {0}")]
    DegenerateBeam(String),

    /// A channel vector required to be non-zero was zero.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    /// The SDP solver could not return an optimal point.
    #[error("solver error: {0}")]
    Solver(String),

    /// Experiment configuration could not be parsed or is inconsistent.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
