use thiserror::Error;

use crate::weightexpr::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration violates its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("weight expression parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("weight evaluation error: {0}")]
    Eval(String),

    /// The estimated quantile density is not strictly positive at `u`.
    #[error("degenerate density estimate at u = {u}: q_hat = {value:e}")]
    DegenerateDensity { u: f64, value: f64 },

    #[error("singular design: condition number {condition:e} exceeds limit")]
    SingularDesign { condition: f64 },

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
}

impl Error {
    /// Stable short name used in diagnostics and failure counters.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Config(_) => "ConfigError",
            Error::Parse(_) => "ParseError",
            Error::Eval(_) => "EvalError",
            Error::DegenerateDensity { .. } => "DegenerateDensity",
            Error::SingularDesign { .. } => "SingularDesign",
            Error::QuadratureFailure(_) => "QuadratureFailure",
        }
    }
}
