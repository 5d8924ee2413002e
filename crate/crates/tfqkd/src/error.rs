//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A failure probability fell outside the open interval (0, 1).
    #[error("{name} = {value:e} is not a valid probability in (0, 1)")]
    InvalidProbability { name: &'static str, value: f64 },

    /// An observed count exceeding the number of trials it was drawn from.
    #[error("observed count {observed:e} exceeds trial count {n_trials:e}")]
    ObservedExceedsTrials { observed: f64, n_trials: f64 },

    /// Preconditions of the multiplicative Chernoff bound do not hold for
    /// the supplied counts; the caller must fall back to another model or
    /// abandon the point.
    #[error(
        "multiplicative Chernoff conditions not met: lower-bounded mean {tau_star_lower:e} \
         must exceed {required:e}"
    )]
    ConditionsNotMet { tau_star_lower: f64, required: f64 },

    /// A bisection bracket did not straddle a sign change.
    #[error(
        "no sign change in bisection bracket [{lo:e}, {hi:e}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}"
    )]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// The closed-form deviation approximation was requested outside its
    /// validity range; the exact solver must be used instead.
    #[error("deviation approximation needs observed >= {required:e}, got {observed:e}")]
    ApproxPrecondition { observed: f64, required: f64 },

    /// The channel produced no signal detections; the point carries no key.
    #[error("zero signal: expected s_Z <= 0 at eta = {eta:e}")]
    ZeroSignal { eta: f64 },

    /// Binary entropy argument outside [0, 1].
    #[error("binary entropy argument {x:e} outside [0, 1]")]
    EntropyDomain { x: f64 },

    /// PLOB reference bound is only defined for transmittance in (0, 1).
    #[error("PLOB bound undefined at eta = {eta:e}; requires eta in (0, 1)")]
    PlobDomain { eta: f64 },

    /// A config file failed to parse; `line` is 1-based.
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    /// A structurally valid config violates a protocol invariant.
    #[error("invalid config: {message}")]
    InvalidConfig { message: String },

    /// Anything else that makes an operation undefined.
    #[error("{message}")]
    InvalidArgument { message: String },
}

impl Error {
    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            message: message.into(),
        }
    }
}
