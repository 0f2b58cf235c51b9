use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("reference exponent mismatch: {0} vs {1}")]
    ExponentMismatch(f64, f64),
    #[error("generator {gen} out of range [1, {max}] for dimension {dim}")]
    InvalidGenerator { gen: u32, max: u64, dim: usize },
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
    #[error("duplicate index {0}")]
    DuplicateIndex(String),
    #[error("zero or non-finite amplitude at {0}")]
    BadAmplitude(String),
    #[error("parameter out of range: {0}")]
    Param(String),
    #[error("empty sequence")]
    EmptySequence,
    #[error("field {0} is not a lattice field")]
    NonLattice(usize),
    #[error("tail window {window} exceeds sequence length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
