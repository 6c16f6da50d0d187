use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image must have at least one pixel")]
    EmptyImage,

    #[error("pixel buffer holds {actual} pixels but {width}x{height} needs {expected}")]
    PixelCount {
        width: u32,
        height: u32,
        expected: usize,
        actual: usize,
    },

    #[error("no pixels to build a histogram from")]
    EmptyHistogram,

    #[error("histogram `{0}` has zero total count")]
    ZeroTotal(String),

    #[error("bandwidth must be positive and finite, got {0}")]
    Bandwidth(f64),

    #[error("k must be at least 1")]
    ZeroClusters,

    #[error("n must be at least 1")]
    ZeroTopN,

    #[error("need at least two histograms for a KS matrix, got {0}")]
    TooFewHistograms(usize),

    #[error("class index {index} at pixel {position} is outside the taxonomy (max {max})")]
    ClassIndex {
        index: u8,
        position: usize,
        max: u8,
    },

    #[error("unknown class name `{0}`")]
    UnknownClass(String),

    #[error("image is {image_width}x{image_height} but mask is {mask_width}x{mask_height}")]
    ShapeMismatch {
        image_width: u32,
        image_height: u32,
        mask_width: u32,
        mask_height: u32,
    },

    #[error("no masks given")]
    NoMasks,

    #[error("invalid lexicon: {0}")]
    Lexicon(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported image format for {0} (expected PNG or JPEG)")]
    UnsupportedFormat(PathBuf),

    #[error("dataset root {0} does not exist or is not a directory")]
    MissingRoot(PathBuf),

    #[error("analysis `{0}` is enabled but has no valid inputs")]
    NoInputs(&'static str),

    #[error("failed to decode {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
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
