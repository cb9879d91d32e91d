use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transform order {0} is not a power of two")]
    NonPowerOfTwo(usize),
    #[error("transform order {0} exceeds the maximum supported order {1}")]
    OrderTooLarge(usize, usize),
    #[error("image width {width} is smaller than the transform order {order}")]
    WidthTooSmall { width: usize, order: usize },
    #[error("expected {expected} per-channel values, got {got}")]
    ChannelCountMismatch { expected: usize, got: usize },
    #[error("channel 0 must have a gain exponent of 0, got {0}")]
    NonZeroDcAlpha(u32),
    #[error("channel gain must be positive")]
    ZeroGain,
    #[error("data length {len} does not match {width}x{height}")]
    DataLengthMismatch {
        len: usize,
        width: usize,
        height: usize,
    },
    #[error("bit width {0} is outside the supported range")]
    BitsOutOfRange(u32),
    #[error("gain exponent {0} is outside the supported range")]
    AlphaOutOfRange(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("code {code} does not fit in {bits} bits")]
    CodeOverflow { code: u32, bits: u32 },
    #[error("calibration dataset is empty")]
    EmptyDataset,
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("image side {0} is smaller than the {1}-pixel filter window")]
    ImageTooSmall(usize, usize),
    #[error("bad magic bytes (not an htq container)")]
    BadMagic,
    #[error("container payload is {found} bytes, expected {expected}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("container header field {0} is out of range")]
    HeaderFieldOutOfRange(&'static str),
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
}

pub type Result<T> = std::result::Result<T, Error>;
