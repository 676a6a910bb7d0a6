use thiserror::Error;

use crate::graph::{EdgeId, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: vertex {vertex} out of range (n = {n})")]
    VertexRange { line: usize, vertex: usize, n: usize },

    #[error("edge {0} does not exist")]
    UnknownEdge(EdgeId),

    #[error("vertex {0} does not exist")]
    UnknownVertex(VertexId),

    #[error("invalid trail: {0}")]
    InvalidTrail(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("infeasible matching: vertex {vertex} has degree {degree} > f = {bound}")]
    Infeasible {
        vertex: VertexId,
        degree: u32,
        bound: u32,
    },

    #[error("blossom structure: {0}")]
    Structural(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("instance too large for {method}: {detail}")]
    TooLarge {
        method: &'static str,
        detail: String,
    },

    #[error("oracle refused input: {0}")]
    Refused(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
