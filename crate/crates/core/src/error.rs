use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left_height}x{left_width} vs {right_height}x{right_width}")]
    DimensionMismatch {
        left_height: usize,
        left_width: usize,
        right_height: usize,
        right_width: usize,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("saliency map has zero total mass")]
    ZeroMassSaliency,

    #[error("rank vector is constant; correlation is undefined")]
    DegenerateRanks,

    #[error("no usable records to aggregate")]
    EmptyAggregate,

    #[error("crop {top},{left} side {side} exceeds {height}x{width} source")]
    CropOutOfBounds {
        top: usize,
        left: usize,
        side: usize,
        height: usize,
        width: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("annotation parse error: {0}")]
    Parse(String),

    #[error("annotation schema error: {0}")]
    Schema(String),

    #[error("no usable (image, class) pairs in dataset")]
    EmptyDataset,

    #[error("RLE counts sum to {actual}, expected {expected}")]
    RleLengthMismatch { expected: usize, actual: usize },

    #[error("corrupt compressed RLE: {0}")]
    RleCorrupt(String),

    #[error("polygon is degenerate (no ring encloses any area)")]
    DegeneratePolygon,

    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("negative saliency values in {0} (see NegativePolicy)")]
    NegativeValues(PathBuf),

    #[error("non-finite saliency values in {0}")]
    NonFiniteValues(PathBuf),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("report summary does not match its records")]
    SummaryMismatch,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
