use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("generator x{generator} is out of range for rank {rank}")]
    GeneratorOutOfRank { generator: usize, rank: usize },
    #[error("rank must be between 2 and 32767, got {0}")]
    InvalidRank(usize),
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("element is not in the derived subgroup (exponent sums {0:?})")]
    NotInDerivedSubgroup(Vec<i64>),
    #[error("division by the zero element")]
    DivisionByZero,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("theory violation: {0}")]
    TheoryViolation(String),
    #[error("search budget of {0} nodes exhausted")]
    BudgetExhausted(usize),
    #[error("checkpoint rejected: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
