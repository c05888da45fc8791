use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Family file is not syntactically valid JSON.
    #[error("{0}")]
    Syntax(String),

    /// Family file is valid JSON but violates the format contract.
    #[error("line {line}: {message}")]
    FamilyFormat { line: usize, message: String },

    /// An argument violates a documented precondition.
    #[error("{0}")]
    InvalidInput(String),

    /// Set index outside 1..=len.
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// An exhaustive enumeration would exceed the configured budget.
    #[error("budget exceeded: needs {required} items, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },

    /// A generated object would not fit its representation.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Codeword i is a prefix of codeword j (1-based).
    #[error("not prefix-free: word {i} is a prefix of word {j}")]
    NotPrefixFree { i: usize, j: usize },

    /// Bitstring decoding failed (truncation, bad rank, or config mismatch).
    #[error("decode error: {0}")]
    Decode(String),
}

pub type Result<T> = std::result::Result<T, Error>;
