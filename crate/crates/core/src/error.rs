use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("range error at (m={m}, n={n}): {detail}")]
    Range { m: i64, n: i64, detail: String },
    #[error("coverage error: {0}")]
    Coverage(String),
    #[error("grid too small: {0}")]
    Size(String),
    #[error("degenerate denominator: {0}")]
    Degenerate(String),
    #[error("no limit: {0}")]
    NoLimit(String),
    #[error("series did not converge: {0}")]
    Convergence(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("generator table: {0}")]
    Table(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type QResult<T> = Result<T, QError>;
