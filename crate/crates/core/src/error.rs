use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LockInError {
    /// A loop parameter violates its admissible range.
    #[error("invalid parameter `{name}` = {value}: must satisfy {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// An argument lies outside the domain an operation is defined on.
    #[error("{operation}: argument {value} outside domain {domain}")]
    Domain {
        operation: &'static str,
        value: f64,
        domain: String,
    },

    /// A published formula was asked for outside the region in which it holds.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// A root solve or landmark evaluation failed.
    #[error("numeric failure in {context}: {detail}")]
    Numeric { context: String, detail: String },

    /// The ODE integrator could not continue.
    #[error("integrator failure at t = {t}: {detail}")]
    Integrator { t: f64, detail: String },

    /// A bisection search could not bracket the boundary it was looking for.
    #[error("search failure: {0}")]
    Search(String),
}

impl LockInError {
    pub(crate) fn numeric(context: impl Into<String>, detail: impl Into<String>) -> Self {
        LockInError::Numeric {
            context: context.into(),
            detail: detail.into(),
        }
    }

    /// True for errors caused by bad input rather than a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            LockInError::InvalidParameter { .. }
                | LockInError::Domain { .. }
                | LockInError::NotApplicable(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, LockInError>;
