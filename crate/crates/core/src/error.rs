//! Crate-wide error type.

/// Errors produced by bound evaluation, transforms, and the harness.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// `lambda` fell outside the rate function's domain `[0, b)`.
    #[error("lambda = {lambda} is outside the CGF domain [0, {domain_sup})")]
    LambdaOutOfDomain { lambda: f64, domain_sup: f64 },

    /// A scalar argument violated its precondition. `name` identifies the
    /// offending field so front ends can point at it.
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A loss sample set was rejected.
    #[error("loss samples rejected: {0}")]
    InvalidSamples(String),

    /// Weights do not form a probability vector.
    #[error("not a probability vector: {0}")]
    SimplexViolation(String),

    /// A finite model class failed validation.
    #[error("model class rejected: {0}")]
    InvalidModelClass(String),

    /// A bound/environment/posterior-rule combination that is not defined.
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
