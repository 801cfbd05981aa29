use thiserror::Error;

/// Errors produced by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A channel or traffic model is internally inconsistent.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A scenario field needed by the requested analysis was not supplied.
    #[error("missing scenario parameter `{0}`")]
    MissingParameter(&'static str),

    /// The requested evaluation mode does not exist for this input.
    #[error("unsupported mode: {0}")]
    Unsupported(String),

    /// An iterative numerical routine failed to reach its tolerance.
    #[error("numerical routine `{op}` did not converge: {reason}")]
    NotConverged { op: &'static str, reason: String },
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
