use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("unsupported format for {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("corrupt or unreadable header in {path}: {reason}")]
    CorruptHeader { path: PathBuf, reason: String },

    #[error("cannot write {path}: {reason}")]
    Write { path: PathBuf, reason: String },

    #[error("invalid image data: {0}")]
    InvalidImage(String),

    #[error("invalid depth data: {0}")]
    InvalidDepth(String),

    #[error("malformed hex color code {0:?}, expected #RRGGBB")]
    MalformedHex(String),

    #[error("color deviation {hex} violates the R > G > B ordering")]
    OrderingViolation { hex: String },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("image too small: {0}")]
    TooSmall(String),

    #[error("empty palette")]
    EmptyPalette,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("k = {k} exceeds the number of distinct samples ({distinct})")]
    TooFewDistinct { k: usize, distinct: usize },

    #[error("manifest invalid: {0}")]
    InvalidManifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn shape(width: usize, height: usize) -> String {
    format!("{width}x{height}")
}
