use thiserror::Error;

/// Errors raised by the bound, copula, estimation and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpnError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate denominator: P(Y(1) >= c1 | x) is zero")]
    DegenerateDenominator,

    #[error("missing input: {0}")]
    MissingInput(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("mixed bound methods cannot be aggregated")]
    MixedMethods,

    #[error("degenerate interval: {0}")]
    DegenerateInterval(String),

    #[error("inconsistent sensitivity curve: {0}")]
    InconsistentCurve(String),

    #[error("degenerate treatment: {0}")]
    DegenerateTreatment(String),

    #[error("model fit failed: {0}")]
    Fit(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("subsampling aborted: {failed} of {total} replicates failed")]
    SubsampleAborted { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, GpnError>;

pub(crate) fn domain(msg: impl Into<String>) -> GpnError {
    GpnError::Domain(msg.into())
}
