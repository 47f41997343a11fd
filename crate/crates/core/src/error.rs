use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid data summary: {0}")]
    InvalidData(String),

    #[error("prior family {prior} does not match outcome model {model}")]
    FamilyMismatch {
        prior: &'static str,
        model: &'static str,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "quadrature did not converge: estimated error {error:e} after {intervals} subintervals"
    )]
    QuadratureNonConvergence { error: f64, intervals: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("optimizer did not converge: {0}")]
    OptimizerNonConvergence(String),

    #[error("root not bracketed on [{lo}, {hi}]")]
    RootNotBracketed { lo: f64, hi: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
