use crate::conditions::ConditionReport;
use crate::entropy::{EntropyVariable, Membership};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("{operation} requires {required}, got {membership:?} point ({u1}, {u2})")]
    Domain {
        operation: &'static str,
        required: &'static str,
        membership: Membership,
        u1: f64,
        u2: f64,
    },

    #[error("precondition `{}` failed for {operation}", report.label)]
    Precondition {
        operation: &'static str,
        report: Box<ConditionReport>,
    },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NewtonFailure {
        iterations: usize,
        residual: f64,
        iterate: Vec<EntropyVariable>,
    },

    #[error("time step underflow at t = {t}: tau {tau:.3e} below floor {tau_min:.3e}")]
    TauUnderflow { t: f64, tau: f64, tau_min: f64 },

    #[error("invalid initial data: {0}")]
    InitialData(String),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("parameters rejected by `{}` check", report.label)]
    Admissibility { report: Box<ConditionReport> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }

    /// Short machine-readable kind used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidState(_) => "invalid_state",
            Error::Domain { .. } => "domain",
            Error::Precondition { .. } => "precondition",
            Error::NewtonFailure { .. } => "newton_failure",
            Error::TauUnderflow { .. } => "tau_underflow",
            Error::InitialData(_) => "initial_data",
            Error::Config { .. } => "config",
            Error::Admissibility { .. } => "admissibility",
            Error::Io(_) => "io",
        }
    }
}
