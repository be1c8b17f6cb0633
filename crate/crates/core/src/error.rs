use std::fmt;

use crate::frame::ColorSpace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Header parameter a Y4M stream must carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Y4mParam {
    Width,
    Height,
    FrameRate,
}

impl fmt::Display for Y4mParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Y4mParam::Width => "W",
            Y4mParam::Height => "H",
            Y4mParam::FrameRate => "F",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    // pixel substrate
    #[error("invalid colorspace: expected {expected:?}, found {found:?}")]
    InvalidColorspace { expected: ColorSpace, found: ColorSpace },
    #[error("region {x},{y} {w}x{h} lies outside a {width}x{height} frame")]
    RegionOutOfBounds { x: usize, y: usize, w: usize, h: usize, width: usize, height: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    // wavelet transform
    #[error("cannot transform an empty plane")]
    EmptyPlane,
    #[error("signal length {0} is odd")]
    OddLengthSignal(usize),
    #[error("signal of length {0} is too short for the filter bank")]
    SignalTooShort(usize),
    #[error("approximation band has {approx} samples but detail band has {detail}")]
    BandLengthMismatch { approx: usize, detail: usize },
    #[error("{requested} levels requested but at most {max_allowed} fit this frame")]
    TooManyLevels { requested: usize, max_allowed: usize },
    #[error("corrupt pyramid: {0}")]
    CorruptPyramid(String),
    #[error("unknown wavelet basis {0:?}")]
    UnknownBasis(String),

    // coefficient destruction
    #[error("policy covers {policy} levels but the pyramid has {pyramid}")]
    PolicyLevelMismatch { policy: usize, pyramid: usize },
    #[error("cannot destroy {depth} levels of a {levels}-level decomposition")]
    InvalidDepth { depth: usize, levels: usize },
    #[error("gain {0} is outside [0, 1]")]
    InvalidGain(f64),

    // baselines
    #[error("gaussian sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("downsample factor {factor} is invalid for a {width}x{height} frame")]
    InvalidFactor { factor: usize, width: usize, height: usize },
    #[error("{segments} superpixels requested for {pixels} pixels")]
    TooManySegments { segments: usize, pixels: usize },
    #[error("invalid superpixel parameters: {0}")]
    InvalidSlicParams(String),

    // metrics
    #[error("frame {width}x{height} is smaller than the {window}x{window} window")]
    FrameTooSmall { width: usize, height: usize, window: usize },
    #[error("original object/background contrast is below 1e-6")]
    DegenerateContrast,
    #[error("object and background regions overlap")]
    RegionsOverlap,

    // PPM
    #[error("bad PPM magic number")]
    BadMagic,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("payload truncated: expected {expected} bytes, got {got}")]
    TruncatedPayload { expected: usize, got: usize },
    #[error("unsupported maxval {0}")]
    UnsupportedMaxval(u32),
    #[error("image dimensions {width}x{height} exceed the decoder limit")]
    DimensionsTooLarge { width: usize, height: usize },

    // Y4M
    #[error("stream does not start with the YUV4MPEG2 signature")]
    BadSignature,
    #[error("stream header is missing the {0} parameter")]
    HeaderParamMissing(Y4mParam),
    #[error("frame {index}: FRAME marker missing")]
    FrameMarkerMissing { index: usize },
    #[error("frame {index}: expected {expected} payload bytes, got {got}")]
    ShortFrame { index: usize, expected: usize, got: usize },
    #[error("unsupported chroma layout {0:?}")]
    UnsupportedChroma(String),

    // harness
    #[error("scene {width}x{height} is too small (dims must be even and at least 128)")]
    SceneTooSmall { width: usize, height: usize },
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
