use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex count {0} is outside the supported range 1..={max}", max = crate::digraph::MAX_VERTICES)]
    VertexCount(usize),

    #[error("code {code} does not fit a {n}-vertex adjacency matrix")]
    CodeOutOfRange { n: usize, code: u32 },

    #[error("invalid vertex subset {subset:?} for a {n}-vertex digraph")]
    InvalidSubset { n: usize, subset: Vec<usize> },

    #[error("a two-element type needs two distinct vertices, got ({0}, {0})")]
    SameVertex(usize),

    #[error("vertex {vertex} out of range for a {n}-vertex digraph")]
    VertexOutOfRange { n: usize, vertex: usize },

    #[error("malformed digraph token {0:?}, expected \"n:code\"")]
    Token(String),

    #[error("level {0} exceeds the supported maximum of {max}", max = crate::digraph::MAX_VERTICES)]
    Capacity(usize),

    #[error("level {0} is not present in the store")]
    MissingLevel(usize),

    #[error("digraph {0} is not present in the store")]
    UnknownDigraph(String),

    #[error("level map is not a bijection on level {level}")]
    NotBijective { level: usize },

    #[error("level maps have incompatible shapes")]
    ShapeMismatch,

    #[error("rule {rule} does not induce a bijection on level {level}")]
    RuleDefect { rule: String, level: usize },

    #[error("exhaustive enumeration of Aut D_{n} refused; estimated order {estimate}")]
    TooLarge { n: usize, estimate: String },

    #[error("map does not satisfy the extension condition into level {0}")]
    NotExtendible(usize),

    #[error("equivalence class of size {size} on level 3 (expected at most 2)")]
    OversizedClass { size: usize },

    #[error("could not locate {0} on level 3")]
    AnchorMissing(&'static str),

    #[error("store file {path}: content hash mismatch (expected {expected}, found {found})")]
    HashMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("store is inconsistent: {0}")]
    Corrupt(String),

    #[error("io error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json in {path}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
