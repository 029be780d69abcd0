//! Error type shared by every module in this crate.
//!
//! Constructors validate their inputs eagerly so that numeric kernels can
//! assume well-formed data; all contract violations surface as one of the
//! variants below rather than as NaN propagation deep inside a simulation.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Catch-all for argument contract violations (empty inputs, nonfinite
    /// values, out-of-range parameters). The message names the argument.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two sequences that must agree in length do not.
    #[error("length mismatch: {left} vs {right} ({context})")]
    LengthMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },

    /// Matrix or vector dimensions are incompatible with the operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The requested sample rate cannot represent the highest tone.
    #[error("sample rate {sample_rate} is below the anti-alias bound {bound}")]
    Aliasing { sample_rate: f64, bound: f64 },

    /// A ratio against a zero-power waveform was requested.
    #[error("zero-power waveform in {0}")]
    ZeroPower(&'static str),

    /// Free-space propagation evaluated inside the excluded near-field ball.
    #[error("near-field violation: distance {distance} is not above {minimum}")]
    NearField { distance: f64, minimum: f64 },

    /// A passive reflector cannot have a reflection gain above one.
    #[error("reflection coefficient magnitude {0} exceeds 1")]
    ActiveReflection(f64),

    /// Sylvester construction requires a power-of-two order.
    #[error("matrix order {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),

    /// No constellation of the requested size fits the passive unit disk at
    /// the required minimum point distance.
    #[error("no packing of {points} points with minimum distance {min_distance} fits the unit disk")]
    PackingInfeasible { points: usize, min_distance: f64 },

    /// The radial fit window contains too few usable samples.
    #[error("insufficient radial span: {0}")]
    InsufficientRadialSpan(String),

    /// Peak extraction could not find the requested number of separated maxima.
    #[error("found {found} separated maxima, needed {requested}")]
    TooFewPeaks { found: usize, requested: usize },

    /// A derived quantity failed a numeric sanity bound (normalization drift,
    /// non-finite accumulation). Indicates a defective configuration rather
    /// than a caller bug.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shorthand used by validators below; keeps call sites one line.
pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// Validates that every element of `values` is finite; `name` is the
/// argument name used in the error message.
pub(crate) fn ensure_finite(values: &[f64], name: &str) -> Result<()> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(invalid(format!("{name}[{i}] is not finite")));
    }
    Ok(())
}

/// Validates a single finite, strictly positive scalar.
pub(crate) fn ensure_positive(value: f64, name: &str) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(invalid(format!("{name} must be finite and > 0, got {value}")));
    }
    Ok(())
}
