use thiserror::Error;

use crate::graph::{Edge, Vertex};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(Vertex, Vertex),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("edge {0} shares a vertex with another matched edge")]
    NotAMatching(Edge),
    #[error("path {0:?} is not augmenting")]
    NotAugmenting(Vec<Vertex>),
    #[error("vertex {0} appears on more than one path")]
    OverlappingPaths(Vertex),

    #[error("matrix query on a diagonal pair ({0}, {0})")]
    DiagonalQuery(Vertex),
    #[error("list index must be at least 1")]
    ZeroListIndex,
    #[error("{0} query issued to a {1} oracle")]
    WrongModel(&'static str, &'static str),

    #[error("incorrect-guess count {incorrect} exceeds query count {queries}")]
    BoundDomain { incorrect: u64, queries: u64 },

    #[error("search inconsistency: {0}")]
    Inconsistent(String),
    #[error("phase count {phases} exceeds the limit {limit} for n = {n}")]
    TooManyPhases { phases: usize, limit: usize, n: usize },

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("scaling fit undefined: {0}")]
    UndefinedFit(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
