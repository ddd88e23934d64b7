use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mu must be at least 2, got {0}")]
    MuTooSmall(usize),

    #[error("order {0} exceeds the supported maximum {max}", max = crate::MAX_ORDER)]
    OrderTooLarge(usize),

    #[error("cell ({row}, {col}) out of range for order {m} (1-based)")]
    CellOutOfRange { row: usize, col: usize, m: usize },

    #[error("cell ({row}, {col}) has {got} entries, expected mu = {mu} (1-based)")]
    WrongEntryCount { row: usize, col: usize, got: usize, mu: usize },

    #[error("duplicate cell ({row}, {col}) (1-based)")]
    DuplicateCell { row: usize, col: usize },

    #[error("symbol {sym} out of range 1..={m}")]
    SymbolOutOfRange { sym: usize, m: usize },

    #[error("column {col} out of range 1..={m}")]
    ColumnOutOfRange { col: usize, m: usize },

    #[error("layer index {got} out of range for mu = {mu} (0-based)")]
    LayerOutOfRange { got: usize, mu: usize },

    #[error("expected a permutation of 0..{len}")]
    NotAPermutation { len: usize },

    #[error("layer selection must keep at least 2 distinct layers")]
    TooFewLayers,

    #[error("{order} is not a prime power")]
    NotAPrimePower { order: usize },

    #[error("no built-in field of order {0} (supported: p^e <= 64)")]
    UnsupportedField(usize),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("verification failed: {summary}")]
    VerificationFailed { summary: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
