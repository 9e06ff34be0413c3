//! Grayscale images, search locations and window views.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A position in an image or search extent, written `(row, col)` with the
/// origin at the top-left. Ordering is row-major, which is also the
/// positional tie-break used by every matcher.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Location {
    pub row: usize,
    pub col: usize,
}

impl Location {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl From<(usize, usize)> for Location {
    fn from((row, col): (usize, usize)) -> Self {
        Self { row, col }
    }
}

/// Row-major grayscale intensity array. Intensities are real numbers,
/// nominally 0-255 but unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(data.len()) {
            return Err(Error::InvalidDimensions { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from `f(row, col)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::new(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    /// Number of valid placements `(rows, cols)` of an `m x n` window.
    pub fn extent(&self, m: usize, n: usize) -> Result<(usize, usize)> {
        if m == 0 || n == 0 || m > self.height || n > self.width {
            return Err(Error::WindowTooLarge { m, n, height: self.height, width: self.width });
        }
        Ok((self.height - m + 1, self.width - n + 1))
    }

    /// Borrowed `m x n` window with top-left corner at `loc`.
    pub fn window(&self, loc: Location, m: usize, n: usize) -> Result<Window<'_>> {
        if m == 0 || n == 0 || loc.row + m > self.height || loc.col + n > self.width {
            return Err(Error::WindowTooLarge { m, n, height: self.height, width: self.width });
        }
        Ok(Window { image: self, origin: loc, m, n })
    }

    /// Copies an `m x n` window out into its own image.
    pub fn crop(&self, loc: Location, m: usize, n: usize) -> Result<Image> {
        let win = self.window(loc, m, n)?;
        let mut data = Vec::with_capacity(m * n);
        for r in win.rows() {
            data.extend_from_slice(r);
        }
        Image::new(n, m, data)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Image {
        Image { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub(crate) fn same_shape(&self, other: &Image) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::ShapeMismatch {
                expected: (self.height, self.width),
                found: (other.height, other.width),
            });
        }
        Ok(())
    }
}

/// An `m x n` view into an [`Image`].
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    image: &'a Image,
    origin: Location,
    m: usize,
    n: usize,
}

impl<'a> Window<'a> {
    pub fn height(&self) -> usize {
        self.m
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn origin(&self) -> Location {
        self.origin
    }

    pub fn rows(&self) -> impl Iterator<Item = &'a [f64]> + Clone + 'a {
        let image = self.image;
        let (origin, n) = (self.origin, self.n);
        (origin.row..origin.row + self.m).map(move |r| &image.row(r)[origin.col..origin.col + n])
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + Clone + 'a {
        self.rows().flat_map(|r| r.iter().copied())
    }
}
