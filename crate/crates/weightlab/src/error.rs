use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("tail error: scale below materialized coverage")]
    BelowCoverage,
    #[error("tail error: {0}")]
    Tail(String),
    #[error("divergent moment: {0}")]
    DivergentMoment(String),
    #[error("inadmissible: non-integrable")]
    NonIntegrable,
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
