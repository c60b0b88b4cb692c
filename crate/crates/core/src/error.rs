use thiserror::Error;

/// Errors produced by the numerical kernels, the link model and the sweep driver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    /// An iterative or adaptive routine did not reach its tolerance. The best
    /// estimate obtained so far is kept so callers can report it.
    #[error("numeric failure in {what}: best estimate {estimate:e} with error {error_estimate:e}")]
    NumericFailure {
        what: &'static str,
        estimate: f64,
        error_estimate: f64,
    },

    #[error("invalid system configuration: {0}")]
    InvalidConfig(String),

    #[error("symbol {0} is not part of the constellation")]
    SymbolNotInConstellation(f64),

    #[error("user index {index} out of range 1..={users}")]
    UserOutOfRange { index: usize, users: usize },

    #[error("error event is degenerate (upsilon = 0)")]
    DegenerateEvent,

    #[error("enumeration of {size} assignments exceeds the cap of {cap}")]
    EnumerationTooLarge { size: u128, cap: u128 },

    #[error("closed form is only available for alpha = 1 or alpha = 2 (got {0})")]
    UnsupportedAlpha(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        function,
        detail: detail.into(),
    }
}
