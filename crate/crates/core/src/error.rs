use thiserror::Error;

/// Errors raised by maze construction, state preparation and the analytic
/// evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid maze size: {0}")]
    Sizing(String),
    #[error("unknown vertex name `{0}`")]
    UnknownVertex(String),
    #[error("not an edge of this maze: {0}")]
    InvalidEdge(String),
    #[error("edge index {index} out of range (maze has {len} directed edges)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("step count must be even, got {0}")]
    OddSteps(u64),
    #[error("unsupported on this topology: {0}")]
    Topology(String),
    #[error("malformed maze document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
