use crate::alphabet::Role;
use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("unknown axis {0} in joint distribution")]
    UnknownAxis(Role),

    #[error("distribution is not normalized: total mass {total}")]
    NonNormalized { total: String },

    #[error("negative mass at cell {cell}: {value}")]
    NegativeMass { cell: String, value: String },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("invalid measure query: {0}")]
    InvalidQuery(String),

    #[error("information diagram supports 2..=4 variables, got {0}")]
    TooManyAxes(usize),

    #[error("conditional row for {0} has no mass")]
    DegenerateConditional(String),

    #[error("erasure probability {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("rate {rate} outside the regime of design {design}: {detail}")]
    RegimeError {
        design: String,
        rate: f64,
        detail: String,
    },

    #[error("degenerate source: {0}")]
    DegenerateSource(String),

    #[error(
        "coupling search exhausted its budget: achieved excess {achieved} bits > target {target} bits"
    )]
    SearchFailed { achieved: f64, target: f64 },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("invalid construction: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
