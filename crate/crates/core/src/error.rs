use thiserror::Error;

/// Errors produced by the typical-set and compression routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violated a documented invariant or precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A target lies outside the range the construction can reach.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured size cap would be exceeded.
    #[error("resource limit: {what} requires {required}, cap is {cap}")]
    Resource { what: &'static str, required: f64, cap: f64 },

    /// Bisection hit its iteration cap without reaching the tolerance.
    #[error(
        "no convergence after {iterations} iterations; root bracketed in [{lo}, {hi}] \
         with entropy residuals [{f_lo:e}, {f_hi:e}]"
    )]
    Convergence { iterations: usize, lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// A linear-algebra kernel produced an unusable result.
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad input rather than by limits or numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
