//! Crate-wide error type.

use thiserror::Error;

/// Errors emitted by the laboratory.
///
/// `Domain` marks mathematically invalid inputs (a forbidden mode, a
/// singular symbol), `Config` marks structurally invalid setups (grid
/// mismatches, missing coefficients). The remaining variants signal
/// numerical regimes rather than bugs: a Gramian too ill-conditioned at
/// the current truncation, a time-stepper blow-up, or a Picard iteration
/// started outside the contraction ball.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "numerically unobservable at this truncation: min eigenvalue {min_eig:.3e} \
         below {threshold:.3e} (gramian norm {norm:.3e})"
    )]
    Unobservable {
        min_eig: f64,
        norm: f64,
        threshold: f64,
    },

    #[error("numerical instability at step {step} (t = {time:.6}): {detail}")]
    Instability {
        step: usize,
        time: f64,
        detail: String,
    },

    #[error("outside contraction regime: no convergence after {iterations} Picard iterations")]
    OutsideContraction {
        iterations: usize,
        history: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
