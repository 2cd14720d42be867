use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested quantity.
    #[error("domain error: {0}")]
    Domain(String),

    /// The computation cannot deliver the requested accuracy with the given resources.
    #[error("refused: {0}")]
    Refused(String),

    /// A trace difference is indistinguishable from its numerical error.
    #[error("below noise floor: |delta| = {delta:e} < 10 x error {error:e}")]
    BelowNoiseFloor { delta: f64, error: f64 },

    /// The box is smaller than the operational floor `L * sqrt(kappa) >= 4`.
    #[error("box side {side} below the L-floor {floor} (L * sqrt(kappa) >= 4)")]
    BelowLFloor { side: f64, floor: f64 },

    /// Not enough usable sweep points for a fit.
    #[error("fit needs at least {needed} usable points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    /// An iterative solver failed to converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
