//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("index {index} out of bounds for factor `{factor}` of dimension {dim}")]
    Bounds {
        factor: String,
        index: usize,
        dim: usize,
    },

    #[error("expected {expected} indices, got {got}")]
    IndexArity { expected: usize, got: usize },

    #[error("unknown factor `{0}`")]
    UnknownFactor(String),

    #[error("operands live on different spaces: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },

    #[error("local matrix for factor `{factor}` is {rows}x{cols}, expected {dim}x{dim}")]
    LocalShape {
        factor: String,
        rows: usize,
        cols: usize,
        dim: usize,
    },

    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    Normalization { norm_sqr: f64 },

    #[error("dimension {dim} exceeds capacity {cap}")]
    Capacity { dim: usize, cap: usize },

    #[error("{}", null_postselection_message(*.overlap, .label.as_deref()))]
    NullPostselection { overlap: f64, label: Option<String> },

    #[error("operator structure: {0}")]
    Structure(String),

    #[error("pointer grid: {0}")]
    Grid(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("element {element} ({kind}) is incompatible with a {space} space")]
    IncompatibleElement {
        element: String,
        kind: &'static str,
        space: &'static str,
    },

    #[error("q-plate on mode {mode} would leave the oam ladder (m = {m})")]
    OamOverflow { mode: usize, m: i32 },

    #[error("circuit element #{index}: {source}")]
    AtElement {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown detector `{0}`")]
    UnknownDetector(String),

    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },

    #[error(transparent)]
    Json(#[from] JsonError),
}

fn null_postselection_message(overlap: f64, label: Option<&str>) -> String {
    match label {
        Some(label) => format!("null post-selection for `{label}` (|overlap| = {overlap:e})"),
        None => format!("null post-selection (|overlap| = {overlap:e})"),
    }
}

/// `serde_json::Error` is not `Clone`/`PartialEq`; keep its rendered message.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("json: {0}")]
pub struct JsonError(pub String);

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(JsonError(e.to_string()))
    }
}

impl Error {
    pub(crate) fn at_element(index: usize, source: Error) -> Self {
        Error::AtElement {
            index,
            source: Box::new(source),
        }
    }

    /// True for the failures that come from the numbers rather than from the
    /// input description (ill-posed post-selection, pointer off the grid).
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NullPostselection { .. } | Error::Grid(_) | Error::Normalization { .. } => true,
            Error::AtElement { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
