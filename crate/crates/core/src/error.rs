use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A machine parameter violates its physical invariant. `field` uses the
    /// per-phase naming (`r_a`, `l_b`, `m_ca`, `lam_c`, `pole_pairs`).
    #[error("{field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("inductance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid simulation configuration: {0}")]
    Config(String),

    #[error("integration diverged at step {step} (t = {time:e} s): {detail}")]
    Integration {
        step: usize,
        time: f64,
        detail: String,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("not identifiable: {0}")]
    Identifiability(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
