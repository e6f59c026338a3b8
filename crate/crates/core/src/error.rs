//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("wrong regime for {construction}: {detail}")]
    WrongRegime { construction: String, detail: String },

    #[error("lambda <= 0: divergence is immediate (the kernel is unbounded near infinity for lambda < 0, and the lambda = 0 form has infinite mass); no truncation certificate is produced")]
    LambdaNonpositive,

    #[error("divergent average: the spherical mean of |x-y|^-lambda at s = t diverges for lambda >= n-1")]
    DivergentAverage,

    #[error("norm diverges: {0}")]
    NormDivergence(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("evaluation budget must be positive")]
    ZeroBudget,
}

pub type Result<T> = std::result::Result<T, Error>;
