use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed index structure: {0}")]
    Structural(String),
    #[error("unbound atom: {0}")]
    UnboundAtom(String),
    #[error("free index present in closed evaluation: {0}")]
    FreeIndex(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bilinear form is singular")]
    SingularForm,
    #[error("trace form degenerate")]
    DegenerateTraceForm,
    #[error("not semisimple: [g,g] ≠ g")]
    NotSemisimple,
    #[error("derivation-compatibility violation: F{slot} does not satisfy E·F + Fᵀ·E = 0")]
    IncompatibleDerivation { slot: u8 },
    #[error("wrong chain degree: expected {expected}, got {got}")]
    WrongDegree { expected: String, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no noncommutative representation available: {0}")]
    NoRepresentation(String),
}
