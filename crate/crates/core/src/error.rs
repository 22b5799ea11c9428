use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("value {value} lies outside [0, 1]")]
    OutOfUnitInterval { value: String },

    #[error("digit {digit} is not a base-{base} digit")]
    DigitOutOfRange { digit: u32, base: u32 },

    #[error("base {0} is not supported (need at least 2)")]
    UnsupportedBase(u32),

    #[error("base mismatch: expected {expected}, got {got}")]
    BaseMismatch { expected: u32, got: u32 },

    #[error("invalid pattern: {0}")]
    InvalidPattern(#[from] PatternError),

    #[error("level {level} exceeds the enumeration cap {cap}")]
    ResourceLimit { level: u32, cap: u32 },

    #[error("need {needed} digits, only {got} supplied")]
    InsufficientDigits { needed: usize, got: usize },

    #[error("at least one sample is required")]
    NoSamples,

    #[error("{0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("grid order {0} is too small")]
    OrderTooSmall(usize),

    #[error("row {row} maps to column {col}, outside 0..{order}")]
    OutOfRange { row: usize, col: u32, order: usize },

    #[error("column {col} is retained by rows {first} and {second}")]
    DuplicateColumn {
        col: u32,
        first: usize,
        second: usize,
    },
}
