//! Error type shared by all core modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// Input contained NaN or infinite values.
    #[error("non-finite values in {context}")]
    NonFinite { context: String },

    /// A field claimed to represent real data failed the conjugate-symmetry check.
    #[error("Hermitian symmetry violated: max relative asymmetry {max_rel:.3e} exceeds {tol:.1e}")]
    NotHermitian { max_rel: f64, tol: f64 },

    /// A parameter or configuration value is out of range. `key` names the offending entry.
    #[error("invalid value for `{key}`: {reason}")]
    InvalidParam { key: String, reason: String },

    /// Two operands live on different grids (or a paired run was configured inconsistently).
    #[error("grid/config mismatch: {0}")]
    Mismatch(String),

    /// A diagnostic series handed to an analysis routine is unusable.
    #[error("series rejected: {0}")]
    BadSeries(String),
}

impl CoreError {
    pub fn invalid(key: &str, reason: impl Into<String>) -> Self {
        CoreError::InvalidParam {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
