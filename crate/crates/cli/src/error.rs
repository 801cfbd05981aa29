use std::fmt::Display;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The document does not match the schema; the message carries line and column.
    #[error("invalid configuration: {0}")]
    Schema(serde_json::Error),

    #[error("invalid configuration field `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    /// An analytic or simulation precondition failed at one sweep point.
    #[error("{point}: {cause}")]
    Model {
        point: String,
        cause: throughput_core::error::Error,
    },
}

impl CliError {
    pub fn invalid(field: &str, reason: impl Display) -> Self {
        CliError::Invalid {
            field: field.to_string(),
            reason: reason.to_string(),
        }
    }
}
