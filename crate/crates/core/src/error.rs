use thiserror::Error;

use crate::ica::{IcaReport, UnmixingMatrix};

pub type Result<T, E = LingamError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LingamError {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// FastICA did not converge in any restart. The best-effort estimate is
    /// kept so callers can still inspect or use it.
    #[error("ICA did not converge after {} restarts (best residual {:.3e})", .report.restarts.len(), .report.residual)]
    NotConverged {
        best: Box<UnmixingMatrix>,
        report: Box<IcaReport>,
    },

    #[error("singular structure: {0}")]
    SingularStructure(String),

    #[error("assignment infeasible: no perfect matching with finite cost")]
    Infeasible,

    #[error("exact causal order search supports n <= {limit}, got n = {n}; use the greedy search for larger problems")]
    TooLarge { n: usize, limit: usize },

    #[error("bootstrap unstable: {failed} of {total} resamples failed")]
    Unstable { failed: usize, total: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for LingamError {
    fn from(err: csv::Error) -> Self {
        match err.kind() {
            csv::ErrorKind::Io(_) => match err.into_kind() {
                csv::ErrorKind::Io(io) => LingamError::Io(io),
                _ => unreachable!(),
            },
            _ => LingamError::Parse(err.to_string()),
        }
    }
}

impl From<serde_json::Error> for LingamError {
    fn from(err: serde_json::Error) -> Self {
        if err.is_io() {
            LingamError::Io(err.into())
        } else {
            LingamError::Parse(err.to_string())
        }
    }
}
