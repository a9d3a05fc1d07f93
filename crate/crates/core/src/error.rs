use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("size {size} exceeds the configured limit {limit}")]
    SizeLimit { size: usize, limit: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("inconsistent active set: {0}")]
    StaleActiveSet(String),

    #[error("aggregate enumeration needs {count} vertices, cap is {cap}")]
    EnumerationCap { count: u128, cap: u128 },

    #[error("rule {rule} needs a single-block program, found {blocks} blocks")]
    RuleMismatch { rule: &'static str, blocks: usize },

    #[error("objective is not finite after iteration {0}; the program may be unbounded below")]
    Diverged(usize),

    #[error("unknown recipe `{0}`")]
    UnknownRecipe(String),

    #[error("missing data file {}", .0.display())]
    MissingData(PathBuf),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
