use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Width or height is zero, or the pixel buffer does not match them.
    InvalidDimensions { width: usize, height: usize, len: usize },
    /// An `m x n` window does not fit in a `height x width` source.
    WindowTooLarge { m: usize, n: usize, height: usize, width: usize },
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },
    /// Correlation input outside `[-1, 1]` beyond tolerance.
    CorrelationOutOfRange(f64),
    /// Group sizes must be odd and at least 1.
    InvalidGroupSize { h: usize, w: usize },
    /// The template has zero variance; its correlation is undefined everywhere.
    FlatTemplate,
    InvalidParameter(&'static str),
    /// Auto-correlation map built for a different grid or template size.
    GridMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimensions { width, height, len } => {
                write!(f, "invalid image dimensions {width}x{height} for {len} samples")
            }
            Error::WindowTooLarge { m, n, height, width } => {
                write!(f, "window {m}x{n} does not fit in {height}x{width}")
            }
            Error::ShapeMismatch { expected, found } => write!(
                f,
                "shape mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::CorrelationOutOfRange(v) => write!(f, "correlation {v} outside [-1, 1]"),
            Error::InvalidGroupSize { h, w } => {
                write!(f, "group size {h}x{w} must be odd and at least 1")
            }
            Error::FlatTemplate => f.write_str("template has zero variance"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::GridMismatch => f.write_str("auto-correlation map does not match the group grid"),
        }
    }
}

impl core::error::Error for Error {}
