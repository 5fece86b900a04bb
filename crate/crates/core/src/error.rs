//! Error type shared across the library.

use crate::meb::Ball;
use crate::point_space::PointId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A point id outside the space was referenced.
    #[error("unknown point id {0}")]
    UnknownPoint(PointId),

    /// A vector had the wrong number of coordinates.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The problem instance violates a construction precondition.
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// A configuration value is out of range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A solution object violates its own invariants.
    #[error("invalid solution: {0}")]
    InvalidSolution(String),

    /// The iterative solver hit its iteration cap before reaching tolerance.
    /// Carries the best iterate found so callers can inspect or salvage it.
    #[error("solver did not reach tolerance within {iterations} iterations")]
    SolverFailure { iterations: usize, best: Box<Ball> },

    /// The exact oracle cannot handle an instance of this size.
    #[error("instance too large for the exact oracle: {0}")]
    UnsupportedSize(String),

    /// A failure that occurred inside a specific node's local computation.
    #[error("node {node} at round {round}: {source}")]
    AtNode {
        node: usize,
        round: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// An internal consistency check failed; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Wraps an error with the node/round where it happened.
    pub fn at_node(self, node: usize, round: u64) -> Self {
        Error::AtNode {
            node,
            round,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
