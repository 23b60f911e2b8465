//! Error type shared by every module of the crate.

use thiserror::Error;

/// Everything that can go wrong while building parameters, evaluating
/// observables, running the channel oracle or driving the command line.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain (e.g. `L < 2`, `p <= 0`).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The call hit the exceptional point `g = 1, k = pi/2`, where the
    /// generic formulas are singular and a dedicated routine must be used.
    #[error("exceptional point: {0}")]
    ExceptionalPoint(String),

    /// The requested combination is outside what the routine supports
    /// (e.g. an exceptional-point probe for odd `L`).
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A numerical procedure failed to produce a trustworthy number.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A density matrix with vanishing trace was normalised.
    #[error("degenerate state: trace is {0:e}")]
    DegenerateState(f64),

    /// Fewer sign changes than needed for a frequency estimate; the series is
    /// most likely overdamped.
    #[error("insufficient oscillation: found {found} zero crossings, need at least {needed}")]
    InsufficientOscillation { found: usize, needed: usize },

    /// A matrix had the wrong shape or symmetry for the requested operation.
    #[error("malformed matrix: {0}")]
    Matrix(String),

    /// Input/output failure (CLI, snapshots).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed snapshot or configuration text.
    #[error("format error: {0}")]
    Format(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
