//! Error type shared across the library.
//!
//! Every fallible public operation returns [`Error`]. Numerical failures carry
//! enough context (time, step size, iteration counts, residuals) to diagnose a
//! run post-mortem from the error alone.

/// Unified error type for configuration, I/O, and numerical failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its admissible range, e.g. exponents violating
    /// `1 < p < m` or a non-positive radius.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The implicit time stepper reduced the step below its floor without the
    /// nonlinear solve converging.
    #[error(
        "time step underflow at t = {t:.6e}: dt = {dt:.3e} fell below dt_min = {dt_min:.3e} ({detail})"
    )]
    TimeStepUnderflow {
        /// Simulation time at which the stepper gave up.
        t: f64,
        /// Last attempted step size.
        dt: f64,
        /// Configured smallest admissible step.
        dt_min: f64,
        /// What the Newton iteration reported on the final attempt.
        detail: String,
    },

    /// Inverse-power iteration for the fundamental eigenvalue stalled.
    #[error(
        "eigenvalue iteration did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    EigenNotConverged {
        /// Number of inverse-power iterations performed.
        iterations: usize,
        /// Rayleigh residual at the last iterate.
        residual: f64,
    },

    /// A scenario configuration file is structurally valid JSON but violates
    /// a semantic constraint (missing section, inconsistent choices, ...).
    #[error("invalid scenario configuration: {0}")]
    Config(String),

    /// Filesystem failure while reading configuration or writing reports.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A configuration file could not be parsed as JSON.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand constructor for [`Error::InvalidParameter`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
