use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("decode failure for {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("unsupported depth in {path}: {bits} bits per channel (only 8-bit images are accepted)")]
    UnsupportedDepth { path: PathBuf, bits: u16 },

    #[error("encode failure for {path}: {message}")]
    Encode { path: PathBuf, message: String },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("region {x0},{y0} {width}x{height} is out of bounds for a {image_width}x{image_height} image")]
    RegionOutOfBounds {
        x0: usize,
        y0: usize,
        width: usize,
        height: usize,
        image_width: usize,
        image_height: usize,
    },

    #[error("misalignment of {n_c} pixels is too large for a {width}x{height} image")]
    MisalignmentTooLarge { n_c: usize, width: usize, height: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cumulative histogram totals differ ({source_total} vs {target_total})")]
    TotalMismatch { source_total: u64, target_total: u64 },

    #[error("bin {0} is empty in the source histogram")]
    EmptyBin(u8),

    #[error("under-determined table: {present} present entries, at least 2 required")]
    UnderDetermined { present: usize },

    #[error("table is not total: entry {0} is absent")]
    NotTotal(usize),

    #[error("channel mismatch: image has {image} channels, {tables} tables supplied")]
    ChannelMismatch { image: usize, tables: usize },

    #[error("image too small for SSIM: {width}x{height}, needs at least {window}x{window}")]
    TooSmallForWindow { width: usize, height: usize, window: usize },

    #[error("table format error: {0}")]
    TableFormat(String),

    #[error("stitch configuration error: {0}")]
    Config(String),

    #[error("overlap {index} has only {area} pixels, at least {min} required")]
    DegenerateOverlap { index: usize, area: usize, min: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
