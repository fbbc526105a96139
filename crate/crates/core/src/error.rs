use thiserror::Error;

use crate::oracle::ProtocolError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("sample index {index} out of range for t = {t}")]
    IndexOutOfRange { index: usize, t: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("malformed matrix file: {0}")]
    Format(String),

    #[error("exhaustive campaign needs {needed} decodes but the budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("no matrix passed the audit after {attempts} attempts")]
    AuditRetriesExhausted { attempts: usize },

    #[error(transparent)]
    Protocol(#[from] ProtocolError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
