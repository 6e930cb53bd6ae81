//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A column name or header does not match the declared schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// A value could not be parsed into the expected representation.
    #[error("parse error: {0}")]
    Parse(String),

    /// An argument lies outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two containers that must agree in length do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An iterative routine failed to converge within its iteration cap.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed or inconsistent run configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
