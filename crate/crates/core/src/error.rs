use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: u64, actual: u64 },

    #[error("unsupported bit depth {0} (expected 8 or 16)")]
    UnsupportedBitDepth(u32),

    #[error("frame size mismatch: expected {expected:?}, found {found:?} in {context}")]
    SizeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
        context: String,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("patch {width}x{height} too small for lag radius {max_lag} (needs at least {min} per side)")]
    PatchTooSmall {
        width: usize,
        height: usize,
        max_lag: usize,
        min: usize,
    },

    #[error("patch of {pixels} pixels exceeds the fixed-point accumulator contract ({max} pixels)")]
    AccumulatorContract { pixels: usize, max: usize },

    #[error("region {0} lies outside the frame")]
    RegionOutOfBounds(String),

    #[error("length mismatch: expected {expected} samples, found {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("insufficient overlap after alignment: {overlap} of {required} samples")]
    InsufficientOverlap { overlap: usize, required: usize },

    #[error("insufficient geometry for direction fit: {0}")]
    InsufficientGeometry(String),

    #[error("no vibration mode found")]
    NoModeFound,

    #[error("all frames are silent or unusable: {0}")]
    NoUsableFrames(String),

    #[error("worker pool: {0}")]
    Pool(String),

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),

    #[error("png: {0}")]
    Png(#[from] png::EncodingError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad arguments or configuration rather than
    /// by the data or the environment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::PatchTooSmall { .. }
                | Error::AccumulatorContract { .. }
                | Error::RegionOutOfBounds(_)
                | Error::UnsupportedBitDepth(_)
        )
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::MalformedHeader(_) => "malformed_header",
            Error::TruncatedPayload { .. } => "truncated_payload",
            Error::UnsupportedBitDepth(_) => "unsupported_bit_depth",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::Empty(_) => "empty",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::PatchTooSmall { .. } => "patch_too_small",
            Error::AccumulatorContract { .. } => "accumulator_contract",
            Error::RegionOutOfBounds(_) => "region_out_of_bounds",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InsufficientOverlap { .. } => "insufficient_overlap",
            Error::InsufficientGeometry(_) => "insufficient_geometry",
            Error::NoModeFound => "no_mode_found",
            Error::NoUsableFrames(_) => "no_usable_frames",
            Error::Pool(_) => "pool",
            Error::Wav(_) => "wav",
            Error::Png(_) => "png",
            Error::Json(_) => "json",
        }
    }
}
