//! Error type shared across the simulator.

use thiserror::Error;

/// Errors surfaced by the simulator core.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Malformed input: bad dimensions, a parameter outside its valid range,
    /// or an unparsable descriptor.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A post-selection sector carried numerically zero weight, so the
    /// conditional state (and its concurrence) is undefined there.
    #[error("empty post-selection sector ({sector}): weight {weight:.3e}")]
    EmptySector {
        /// Which arm was selected on.
        sector: &'static str,
        /// The weight that fell below the cutoff.
        weight: f64,
    },

    /// The requested brute-force simulation would exceed the mode budget.
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    /// A numerical invariant (trace, Hermiticity, positivity, convergence)
    /// was violated at runtime.
    #[error("numerical invariant violated: {0}")]
    NumericalInvariant(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
