//! Running-sum tables: any `m x n` window sum in four reads.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;

/// 2-D prefix sums with one leading zero row and column, so entry
/// `(r, c)` holds the sum of all source values strictly above and left of it.
#[derive(Debug, Clone)]
pub struct PrefixSum {
    stride: usize,
    rows: usize,
    cols: usize,
    table: Vec<f64>,
}

impl PrefixSum {
    pub fn new(src: &[f64], cols: usize, rows: usize) -> Self {
        assert_eq!(src.len(), rows * cols, "source length does not match {rows}x{cols}");
        let stride = cols + 1;
        let mut table = vec![0.0; (rows + 1) * stride];
        for r in 0..rows {
            let mut acc = 0.0;
            let (above, below) = table.split_at_mut((r + 1) * stride);
            let above = &above[r * stride..];
            let below = &mut below[..stride];
            for c in 0..cols {
                acc += src[r * cols + c];
                below[c + 1] = above[c + 1] + acc;
            }
        }
        Self { stride, rows, cols, table }
    }

    pub fn from_image(img: &Image) -> Self {
        Self::new(img.data(), img.width(), img.height())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Sum of the `m x n` window with top-left corner `(row, col)`.
    #[inline]
    pub fn window_sum(&self, row: usize, col: usize, m: usize, n: usize) -> f64 {
        debug_assert!(row + m <= self.rows && col + n <= self.cols);
        let s = self.stride;
        let t = &self.table;
        (t[(row + m) * s + col + n] - t[row * s + col + n]) - (t[(row + m) * s + col] - t[row * s + col])
    }
}

/// Window sums of one fixed `m x n` size at every valid placement.
#[derive(Debug, Clone, PartialEq)]
pub struct SumTable {
    m: usize,
    n: usize,
    rows: usize,
    cols: usize,
    sums: Vec<f64>,
}

impl SumTable {
    pub fn from_slice(src: &[f64], width: usize, height: usize, m: usize, n: usize) -> Result<Self> {
        if src.len() != width * height || width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height, len: src.len() });
        }
        if m == 0 || n == 0 || m > height || n > width {
            return Err(Error::WindowTooLarge { m, n, height, width });
        }
        let prefix = PrefixSum::new(src, width, height);
        let (rows, cols) = (height - m + 1, width - n + 1);
        let mut sums = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                sums.push(prefix.window_sum(r, c, m, n));
            }
        }
        Ok(Self { m, n, rows, cols, sums })
    }

    pub fn window_height(&self) -> usize {
        self.m
    }

    pub fn window_width(&self) -> usize {
        self.n
    }

    /// Number of placements down the source.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of placements across the source.
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.sums[row * self.cols + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sums
    }
}

/// Sum of every `m x n` window of `src`.
pub fn running_sum(src: &Image, m: usize, n: usize) -> Result<SumTable> {
    SumTable::from_slice(src.data(), src.width(), src.height(), m, n)
}
