use thiserror::Error;

use crate::codespec::ViolationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite LLR at position {0}")]
    NonFiniteLlr(usize),

    #[error("frozen position {0} carries a nonzero bit")]
    NonzeroFrozenBit(usize),

    #[error("invalid code specification: {0}")]
    InvalidSpec(ViolationReport),

    #[error("spec syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("node (layer {layer}, phase {phase}) is out of range")]
    NodeOutOfRange { layer: u32, phase: usize },

    #[error("node (layer {layer}, phase {phase}) is a leaf")]
    LeafNode { layer: u32, phase: usize },

    #[error("problem too large for exhaustive evaluation: {0}")]
    TooLarge(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
