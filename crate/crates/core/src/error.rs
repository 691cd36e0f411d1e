use std::path::PathBuf;

use thiserror::Error;

/// Every failure the toolkit reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("query time {time} s outside trajectory span [{start}, {end}] s")]
    QueryOutOfRange { time: f64, start: f64, end: f64 },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("timestamps must be strictly increasing (index {index})")]
    NonMonotonicTimestamps { index: usize },
    #[error("point is behind the camera (z = {z})")]
    BehindCamera { z: f64 },
    #[error("depth must be positive, got {depth}")]
    NonPositiveDepth { depth: f64 },
    #[error("pixel ({u}, {v}) outside {width}x{height} image")]
    OutOfBounds {
        u: f64,
        v: f64,
        width: usize,
        height: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no pixel is valid in both maps")]
    EmptyOverlap,
    #[error("rays are parallel (angle {angle:e} rad)")]
    DegenerateRays { angle: f64 },
    #[error("triangulated point has non-positive depth {depth}")]
    NegativeDepth { depth: f64 },
    #[error("IMU series is already in the camera frame")]
    AlreadyInCameraFrame,
    #[error("IMU series [{start}, {end}] s does not cover time {time} s")]
    CoverageGap { time: f64, start: f64, end: f64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Short class name, printed by the command-line tool on failure.
    pub fn class(&self) -> &'static str {
        match self {
            Error::QueryOutOfRange { .. } => "QueryOutOfRange",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::NonMonotonicTimestamps { .. } => "NonMonotonicTimestamps",
            Error::BehindCamera { .. } => "BehindCamera",
            Error::NonPositiveDepth { .. } => "NonPositiveDepth",
            Error::OutOfBounds { .. } => "OutOfBounds",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::EmptyOverlap => "EmptyOverlap",
            Error::DegenerateRays { .. } => "DegenerateRays",
            Error::NegativeDepth { .. } => "NegativeDepth",
            Error::AlreadyInCameraFrame => "AlreadyInCameraFrame",
            Error::CoverageGap { .. } => "CoverageGap",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::DegenerateGeometry(_) => "DegenerateGeometry",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Format { .. } => "Format",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
            Error::Image(_) => "Image",
            Error::Csv(_) => "Csv",
        }
    }

    /// Process exit code. 2 is reserved for usage errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Image(_) | Error::Csv(_) | Error::Format { .. } => 1,
            Error::Config(_) | Error::InvalidParameter(_) => 3,
            Error::DimensionMismatch(_) | Error::LengthMismatch { .. } => 4,
            _ => 5,
        }
    }
}
