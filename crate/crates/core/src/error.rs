use thiserror::Error;

/// Errors produced anywhere in the scoring pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed signature: expected a YUV4MPEG2 header line")]
    MalformedSignature,
    #[error("malformed Y4M header parameter `{0}`")]
    MalformedHeader(String),
    #[error("unsupported colorspace tag `{0}` (only 4:2:0 and mono are supported)")]
    UnsupportedColorspace(String),
    #[error("malformed frame header at frame {frame}")]
    MalformedFrameHeader { frame: usize },
    #[error("truncated frame payload at frame {frame}: expected {expected} bytes, got {got}")]
    Truncated { frame: usize, expected: usize, got: usize },
    #[error("stream length {len} is not a multiple of frame size {frame_size}")]
    NotFrameMultiple { len: usize, frame_size: usize },
    #[error("invalid geometry {width}x{height}: {reason}")]
    InvalidGeometry {
        width: usize,
        height: usize,
        reason: &'static str,
    },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("a video sequence must contain at least one frame")]
    EmptySequence,
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("frame {width}x{height} is smaller than the {window}x{window} SSIM window")]
    FrameTooSmall { width: usize, height: usize, window: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("reference must have at least as many frames as the distorted video (m >= n), got m = {m}, n = {n}")]
    DistortedLonger { m: usize, n: usize },
    #[error("no feasible strictly increasing frame mapping exists")]
    NoFeasibleMapping,
    #[error("missing indices must be sorted and distinct: {0}")]
    UnsortedMissing(String),
    #[error("inconsistent alignment: {0}")]
    InconsistentAlignment(String),
    #[error("no qualifying site: {0}")]
    NoQualifyingSite(String),
    #[error("invalid drop plan: {0}")]
    InvalidPlan(String),
    #[error("statistic undefined: {0}")]
    Undefined(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
