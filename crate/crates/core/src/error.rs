use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quaternion has (near) zero norm")]
    ZeroQuaternion,
    #[error("quaternion is not unit norm (|q| = {norm})")]
    NonUnitQuaternion { norm: f64 },
    #[error("interpolation factor {0} outside [0, 1]")]
    InvalidGamma(f64),
    #[error("image has no pixels")]
    EmptyImage,
    #[error("motion magnitudes must be nonnegative")]
    NegativeMagnitude,
    #[error("high-pass radius {radius} invalid for a {width}x{height} spectrum")]
    InvalidRadius { radius: f64, width: usize, height: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("observation set is empty")]
    EmptySet,
    #[error("vector list is empty")]
    EmptyList,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("predicted point set carries no confidences")]
    MissingConfidence,
    #[error("raster shapes differ")]
    ShapeMismatch,
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("sequence too short: need at least {required}, got {found}")]
    TooShort { required: usize, found: usize },
    #[error("time step must be positive")]
    NonPositiveDt,
    #[error("depth map has no valid pixels")]
    NoValidPixels,
    #[error("point configuration is degenerate")]
    DegenerateConfiguration,
    #[error("no pixel is valid in both depth maps")]
    NoOverlappingValidity,
    #[error("too few points: need at least {required}, got {found}")]
    TooFewPoints { required: usize, found: usize },
    #[error("timestamps not strictly increasing at index {index}")]
    NonMonotonicTimestamps { index: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
}
