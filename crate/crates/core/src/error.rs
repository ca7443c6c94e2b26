use std::path::PathBuf;

use thiserror::Error;

use crate::graph::Edge;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge {0} is not present in the graph")]
    MissingEdge(Edge),
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("generation failed: {0}")]
    GenerationFailure(String),
    #[error("node {0} has degree zero; the normalized Laplacian is undefined")]
    DegreeZero(usize),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("one side of the bipartition is empty")]
    EmptySide,
    #[error("one side of the bipartition has zero degree volume")]
    ZeroAssoc,
    #[error("plan does not match graph: edge {edge} of batch {batch} is absent")]
    PlanMismatch { batch: usize, edge: Edge },
    #[error("baseline CFE must be positive")]
    ZeroBaseline,
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0} contains no edges")]
    EmptyGraph(PathBuf),
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
