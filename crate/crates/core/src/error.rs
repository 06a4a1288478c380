use thiserror::Error;

use crate::expfit::ExpSumFit;
use crate::models::Violation;
use crate::specfun::QuadResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function}: argument out of domain: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    /// The adaptive integrator ran out of subdivisions; `partial` carries the
    /// best estimate and its (honest) error.
    #[error(
        "quadrature tolerance not met: value {} with error estimate {} after {} evaluations",
        .partial.value,
        .partial.error_estimate,
        .partial.evaluations
    )]
    ToleranceNotMet { partial: QuadResult },

    #[error("integrand is not finite at x = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("invalid model: {}", join_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error(
        "exponential-sum fit for alpha_bar = {} misses the quality gate: max_abs_err {} > {}",
        .fit.alpha_bar,
        .fit.max_abs_err,
        .gate
    )]
    FitQuality { fit: Box<ExpSumFit>, gate: f64 },

    #[error("exponential-sum fit for alpha_bar = {alpha_bar} did not converge from any start")]
    FitNonConvergence { alpha_bar: f64 },

    #[error("strategy `{strategy}` is not applicable to family `{family}`: {reason}")]
    InapplicableStrategy {
        strategy: &'static str,
        family: &'static str,
        reason: &'static str,
    },

    #[error("operation expects family `{expected}`, got `{found}`")]
    FamilyMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("fit was made for alpha_bar = {fit_alpha_bar}, model needs {model_alpha_bar}")]
    FitMismatch {
        fit_alpha_bar: f64,
        model_alpha_bar: f64,
    },

    #[error("parameter regime error: {0}")]
    ParameterRegime(String),

    #[error("invalid modulation: {0}")]
    InvalidModulation(String),

    #[error("error-rate integrity violation: {detail} (value {value})")]
    Integrity { value: f64, detail: String },

    #[error("fit store: {0}")]
    FitStore(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        function,
        detail: detail.into(),
    }
}
