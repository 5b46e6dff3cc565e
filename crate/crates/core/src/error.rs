use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("malformed graph document at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("edge `{edge}` references missing node `{node}`")]
    DanglingEndpoint { edge: String, node: String },
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("duplicate edge kind `{0}`")]
    DuplicateKind(String),
    #[error("edge `{0}` is a self-loop (enable self-loops to allow it)")]
    SelfLoop(String),
    #[error("invalid `{field}` on `{id}`: {reason}")]
    InvalidField {
        id: String,
        field: &'static str,
        reason: String,
    },
}

impl GraphError {
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::Syntax { .. } => "syntax",
            GraphError::DanglingEndpoint { .. } => "dangling_endpoint",
            GraphError::DuplicateNode(_) => "duplicate_node",
            GraphError::DuplicateEdge(_) => "duplicate_edge",
            GraphError::DuplicateKind(_) => "duplicate_kind",
            GraphError::SelfLoop(_) => "self_loop",
            GraphError::InvalidField { .. } => "invalid_field",
        }
    }

    pub fn offending_id(&self) -> Option<&str> {
        match self {
            GraphError::Syntax { .. } => None,
            GraphError::DanglingEndpoint { edge, .. } => Some(edge),
            GraphError::DuplicateNode(id)
            | GraphError::DuplicateEdge(id)
            | GraphError::DuplicateKind(id)
            | GraphError::SelfLoop(id) => Some(id),
            GraphError::InvalidField { id, .. } => Some(id),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpatialError {
    #[error("cannot index an empty point set")]
    Empty,
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("invalid layout parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("layout does not cover node `{0}`")]
    MissingNode(String),
    #[error("non-finite force on node `{0}`")]
    NonFiniteForce(String),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown edge kind `{0}`")]
    UnknownKind(String),
    #[error("invalid filter: {0}")]
    Invalid(String),
}
