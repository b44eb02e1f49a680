use thiserror::Error;

/// Errors produced by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum AfcError {
    /// A parameter violates its documented range.
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    /// Inputs are individually valid but the requested operation is undefined for them.
    #[error("domain error: {0}")]
    Domain(String),

    /// The sampling grid or time horizon cannot resolve the requested feature.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Comb fitting could not find a periodic structure.
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// Malformed input file.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
}

impl AfcError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        AfcError::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            AfcError::Resolution(_) | AfcError::FitFailure(_) => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, AfcError>;
