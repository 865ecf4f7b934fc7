use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid contract: {0}")]
    InvalidContract(String),

    /// An argument is outside the documented domain of an operation.
    #[error("{op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// The fair premium is unbounded because the trigger transform is (numerically) 1.
    #[error("fair premium diverges (denominator {denominator:e})")]
    PremiumDiverges { denominator: f64 },

    /// No closed form is available for this parameter region; use the Monte Carlo oracle.
    #[error("no analytic formula for {0}; Monte Carlo required")]
    McRequired(&'static str),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }
}
