use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected {expected}-channel image, got {actual} channels")]
    Channel { expected: u8, actual: u8 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("label {label} outside scheme of {num_labels} labels")]
    Label { label: u8, num_labels: u8 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("pose document contains no people")]
    NoPerson,

    #[error("schema error: {0}")]
    Schema(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("found {found} arm contour(s), need two")]
    InsufficientContours { found: usize },

    #[error("parse map contains no arm pixels")]
    NoArm,

    #[error("watch localization failed: {0}")]
    Localization(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("optimization diverged at step {step} (loss {loss})")]
    Divergence { step: usize, loss: f64 },

    #[error("image {width}x{height} smaller than {window}x{window} window")]
    Window { width: u32, height: u32, window: usize },

    #[error("no matching image ids to evaluate")]
    EmptyEval,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn decode(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Decode {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
