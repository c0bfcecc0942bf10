//! Error type shared across the toolkit.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed raster input; `offset` is the byte position of the problem.
    #[error("raster decode error at byte {offset}: {reason}")]
    Decode { offset: usize, reason: String },

    /// Frame sequence has a hole; the first missing index is reported.
    #[error("frame sequence gap: missing index {index}")]
    MissingFrameIndex { index: u32 },

    /// Frames in one sequence must share dimensions.
    #[error("frame {index} is {got_width}x{got_height}, expected {width}x{height}")]
    MixedDimensions { index: u32, width: u32, height: u32, got_width: u32, got_height: u32 },

    /// NTXY text that does not parse; 1-based line number.
    #[error("NTXY parse error at line {line}: {reason}")]
    NtxyParse { line: usize, reason: String },

    /// Scene specification rejected; names the offending key.
    #[error("invalid scene spec: {key}: {reason}")]
    SceneSpec { key: String, reason: String },

    /// Tracker/eval configuration value out of range or unusable.
    #[error("invalid config: {key}: {reason}")]
    Config { key: String, reason: String },

    /// Operation applied across mismatched image dimensions.
    #[error("dimension mismatch: expected {expected_width}x{expected_height}, got {got_width}x{got_height}")]
    DimensionMismatch {
        expected_width: u32,
        expected_height: u32,
        got_width: u32,
        got_height: u32,
    },

    /// subtract() called before the background model saw a frame.
    #[error("background model not initialized")]
    UninitializedBackground,

    /// Histogram requested over a region with no pixels inside the frame.
    #[error("region lies fully outside the frame")]
    EmptyRegion,

    /// Histogram pair with different bin counts.
    #[error("histogram bin count mismatch: {left} vs {right}")]
    BinCountMismatch { left: usize, right: usize },

    /// Particle operations need at least one particle.
    #[error("empty particle set")]
    EmptyParticleSet,

    /// Accuracy is undefined without ground truth.
    #[error("ground truth is empty")]
    EmptyGroundTruth,

    /// Cost-benefit analysis needs at least two sweep rows.
    #[error("cost-benefit analysis needs at least 2 sweep rows, got {got}")]
    InsufficientSweepRows { got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
