use thiserror::Error;

use crate::codec::ParseError;
use crate::ring::Ring;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("ring dimension {0} is not a nonzero power of two")]
    BadDimension(usize),
    #[error("log2 q = {0} is outside 1..=62")]
    BadModulus(u32),
    #[error("parameter mismatch: {left:?} vs {right:?}")]
    Mismatch { left: Ring, right: Ring },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("coefficient {0} is not reduced")]
    Unreduced(u64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameters infeasible: {}", .0.join("; "))]
    Infeasible(Vec<String>),
    #[error("bad parameter file: {0}")]
    Format(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("malformed response: expected {expected} tuples, got {actual}")]
    TupleCount { expected: usize, actual: usize },
    #[error("malformed response: {0}")]
    Shape(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("lookup is only available on a lazily sampled oracle")]
    Unsupported,
}

#[derive(Debug, Error)]
pub enum ProverError {
    #[error("strategy {0} needs the trapdoor")]
    MissingTrapdoor(&'static str),
    #[error("no claw for an honestly sampled image; parameters are inconsistent")]
    NoClaw,
    #[error("amplitudes must be finite, non-negative and not both zero")]
    Amplitudes,
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("domain size {0} is not a power of two in 2..=1024")]
    DomainSize(usize),
    #[error("amplitudes must be non-negative and not both zero")]
    Amplitudes,
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("state lost normalization: {0}")]
    Norm(f64),
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("experiment variant {0} requires a lazily sampled oracle")]
    OracleMode(u8),
    #[error(transparent)]
    Prover(#[from] ProverError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}
