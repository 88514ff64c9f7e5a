use thiserror::Error;

/// Errors reported by the evaluators, samplers and audits.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// A scalar argument fell outside the domain of the function.
    #[error("{what} = {value} is outside its domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// Parameter combination violates a documented precondition.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// `n (R - h(k/l + delta_k))` is negative for some admissible count.
    #[error("negative key length at k = {k}: R - h(k/l + delta_k) = {margin}")]
    NegativeKeyLength { k: u64, margin: f64 },

    /// Exhaustive enumeration would exceed the configured guard.
    #[error("size guard exceeded: {what} = {value} (limit {limit})")]
    SizeGuard {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("inner code is not contained in the outer code")]
    NotContained,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("optimization did not converge: {0}")]
    NonConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("transcript is aborted: {0}")]
    Aborted(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        expected,
    }
}
