use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid structure: {0}")]
    InvalidSpec(String),

    #[error("index {index} outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("index set is empty")]
    EmptyIndexSet,

    #[error("no object of weight {weight} is reachable")]
    Unreachable { weight: usize },

    #[error("attempt budget of {attempts} exhausted without acceptance")]
    BudgetExhausted { attempts: u64 },

    #[error("table covers weights up to {have}, {needed} required")]
    TableTooSmall { needed: usize, have: usize },

    #[error("recursion produced a negative count at weight {weight}")]
    NegativeCount { weight: usize },

    #[error("inconsistent table: {0}")]
    InconsistentTable(String),

    #[error("size {n} exceeds the enumeration limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("sample does not map to any enumerated object: {0}")]
    UnmappedSample(String),

    #[error("conditional law is not uniform: {0}")]
    NonUniform(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
