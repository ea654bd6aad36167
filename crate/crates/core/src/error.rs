use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Sample buffer length does not match `width * height * channels`.
    BufferLength {
        expected: usize,
        actual: usize,
    },
    /// Zero width or height.
    EmptyImage,
    UnsupportedChannels(usize),
    UnsupportedScale(usize),
    NonFiniteSample,
    /// Width or height is not a multiple of the scale factor.
    NotDivisible {
        width: usize,
        height: usize,
        scale: usize,
    },
    /// Image is smaller than the scale factor in some dimension.
    TooSmall {
        width: usize,
        height: usize,
        scale: usize,
    },
    /// Operands differ in width, height or channel count.
    ShapeMismatch,
    /// HR dimensions are not `scale` times the LR dimensions.
    DimensionMismatch {
        hr: (usize, usize),
        lr: (usize, usize),
        scale: usize,
    },
    InvalidGeometry(&'static str),
    WindowOutOfBounds,
    /// The largest possible prefix sum does not fit the accumulator type.
    AccumulatorOverflow,
    /// A fixed-point sample would be negative or too large.
    FixedPointRange,
    InvalidPortion(f64),
    InvalidCount,
    InvalidThreshold(f64),
    EmptyGrid,
    /// Map stride is not a multiple of the scale factor, so LR anchors would be fractional.
    UnalignedStride {
        stride: usize,
        scale: usize,
    },
    InvalidScores(&'static str),
    UnknownMetric(u8),
    /// The operation does not apply to this metric.
    MetricMismatch(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BufferLength { expected, actual } => {
                write!(f, "sample buffer has {actual} values, expected {expected}")
            }
            Error::EmptyImage => f.write_str("image has zero width or height"),
            Error::UnsupportedChannels(c) => {
                write!(f, "unsupported channel count {c} (expected 1 or 3)")
            }
            Error::UnsupportedScale(s) => {
                write!(f, "unsupported scale factor {s} (supported: 2, 3, 4)")
            }
            Error::NonFiniteSample => f.write_str("real-valued raster contains NaN or infinity"),
            Error::NotDivisible { width, height, scale } => {
                write!(f, "dimensions not divisible: {width}x{height} is not a multiple of scale {scale}")
            }
            Error::TooSmall { width, height, scale } => {
                write!(f, "image {width}x{height} is smaller than scale {scale}")
            }
            Error::ShapeMismatch => f.write_str("shape mismatch between operands"),
            Error::DimensionMismatch { hr, lr, scale } => {
                write!(f, "dimension mismatch: HR {}x{} is not {scale} x LR {}x{}", hr.0, hr.1, lr.0, lr.1)
            }
            Error::InvalidGeometry(msg) => write!(f, "invalid patch geometry: {msg}"),
            Error::WindowOutOfBounds => f.write_str("window out of bounds"),
            Error::AccumulatorOverflow => f.write_str("integral image total may overflow the accumulator"),
            Error::FixedPointRange => f.write_str("sample out of fixed-point range"),
            Error::InvalidPortion(p) => write!(f, "portion {p} outside (0, 1]"),
            Error::InvalidCount => f.write_str("patch count must be at least 1"),
            Error::InvalidThreshold(t) => write!(f, "IoU threshold {t} outside [0, 1)"),
            Error::EmptyGrid => f.write_str("importance map has no anchors"),
            Error::UnalignedStride { stride, scale } => {
                write!(f, "stride {stride} is not a multiple of scale {scale}; LR anchors would be fractional")
            }
            Error::InvalidScores(msg) => write!(f, "invalid score map: {msg}"),
            Error::UnknownMetric(tag) => write!(f, "unknown metric tag {tag}"),
            Error::MetricMismatch(msg) => f.write_str(msg),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
