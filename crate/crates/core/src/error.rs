use alloc::string::String;

/// Errors raised by the core pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A vector component is NaN or infinite.
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite {
        /// Offending row.
        row: usize,
        /// Offending column.
        col: usize,
    },
    /// Vector rows and token records disagree in count.
    #[error("token count mismatch: {vectors} vectors but {tokens} token records")]
    TokenCountMismatch {
        /// Rows in the embedding matrix.
        vectors: usize,
        /// Token records supplied.
        tokens: usize,
    },
    /// A token record is malformed.
    #[error("invalid token record at row {row}: {reason}")]
    InvalidToken {
        /// Row of the record.
        row: usize,
        /// What is wrong with it.
        reason: String,
    },
    /// Vector dimensions disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Expected dimension.
        expected: usize,
        /// Dimension found.
        got: usize,
    },
    /// A lengths-must-agree precondition failed.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch {
        /// Expected length.
        expected: usize,
        /// Length found.
        got: usize,
    },
    /// No token carries an ontology label.
    #[error("no labeled tokens")]
    NoLabels,
    /// An operation left nothing to work with.
    #[error("empty result: {0}")]
    Empty(&'static str),
    /// A parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Allocation would exceed the configured memory budget.
    #[error("memory budget exceeded: {required} bytes required, budget is {budget} bytes")]
    MemoryBudget {
        /// Bytes the operation needs.
        required: u64,
        /// Configured budget.
        budget: u64,
    },
}

/// Result alias for the core crate.
pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidParameter(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
