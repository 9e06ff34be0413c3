//! Per-window mean and zero-mean norm.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::math;
use crate::sumtable::PrefixSum;

/// A window is flat when `mn*Q - S^2 <= FLAT_RELATIVE * mn*Q`.
pub(crate) const FLAT_RELATIVE: f64 = 1e-11;

/// Integer offset subtracted before summing. Integer-valued images stay
/// exactly representable and the sums stay small.
pub(crate) fn centering_offset(img: &Image) -> f64 {
    math::round(img.mean())
}

/// Per-placement statistics of every `m x n` window of an image.
///
/// Internally holds the centered window sum `S` and `V = mn*Q - S^2` (zero
/// for flat windows), from which mean `S/mn` and norm `sqrt(V/mn)` follow.
#[derive(Debug, Clone)]
pub struct WindowStats {
    m: usize,
    n: usize,
    rows: usize,
    cols: usize,
    offset: f64,
    sum: Vec<f64>,
    var: Vec<f64>,
}

impl WindowStats {
    pub fn new(img: &Image, m: usize, n: usize) -> Result<Self> {
        Self::with_offset(img, m, n, centering_offset(img))
    }

    pub(crate) fn with_offset(img: &Image, m: usize, n: usize, offset: f64) -> Result<Self> {
        let (rows, cols) = img.extent(m, n)?;
        let centered: Vec<f64> = img.data().iter().map(|&v| v - offset).collect();
        let squares: Vec<f64> = centered.iter().map(|&v| v * v).collect();
        let s_tab = PrefixSum::new(&centered, img.width(), img.height());
        let q_tab = PrefixSum::new(&squares, img.width(), img.height());
        let mn = (m * n) as f64;
        let mut sum = Vec::with_capacity(rows * cols);
        let mut var = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let s = s_tab.window_sum(r, c, m, n);
                let q = mn * q_tab.window_sum(r, c, m, n);
                let v = q - s * s;
                sum.push(s);
                var.push(if v <= FLAT_RELATIVE * q { 0.0 } else { v });
            }
        }
        Ok(Self { m, n, rows, cols, offset, sum, var })
    }

    pub fn window_height(&self) -> usize {
        self.m
    }

    pub fn window_width(&self) -> usize {
        self.n
    }

    /// Search extent `(rows, cols)` covered by the maps.
    pub fn extent(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    #[inline]
    pub fn mean(&self, row: usize, col: usize) -> f64 {
        self.sum[self.idx(row, col)] / (self.m * self.n) as f64 + self.offset
    }

    /// Zero-mean norm `sqrt(sum (v - mean)^2)` of the window.
    #[inline]
    pub fn sigma(&self, row: usize, col: usize) -> f64 {
        math::sqrt(self.var[self.idx(row, col)] / (self.m * self.n) as f64)
    }

    #[inline]
    pub fn is_flat(&self, row: usize, col: usize) -> bool {
        self.var[self.idx(row, col)] == 0.0
    }

    pub fn mean_map(&self) -> Vec<f64> {
        (0..self.rows * self.cols).map(|i| self.mean(i / self.cols, i % self.cols)).collect()
    }

    pub fn sigma_map(&self) -> Vec<f64> {
        (0..self.rows * self.cols).map(|i| self.sigma(i / self.cols, i % self.cols)).collect()
    }

    #[inline]
    pub(crate) fn offset(&self) -> f64 {
        self.offset
    }

    /// Centered window sum `S`.
    #[inline]
    pub(crate) fn centered_sum(&self, row: usize, col: usize) -> f64 {
        self.sum[self.idx(row, col)]
    }

    /// `mn*Q - S^2`, zero for flat windows.
    #[inline]
    pub(crate) fn var_num(&self, row: usize, col: usize) -> f64 {
        self.var[self.idx(row, col)]
    }

    pub(crate) fn check_extent(&self, rows: usize, cols: usize) -> Result<()> {
        if (self.rows, self.cols) != (rows, cols) {
            return Err(Error::ShapeMismatch { expected: (self.rows, self.cols), found: (rows, cols) });
        }
        Ok(())
    }
}

/// Correlation coefficient from centered sums: `(mn*Sxy - Sx*Sy) / sqrt(Vx*Vy)`.
/// Zero when either window is flat.
#[inline]
pub(crate) fn rho_from_sums(mn: f64, cross: f64, sx: f64, vx: f64, sy: f64, vy: f64) -> f64 {
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    math::clamp_unit((mn * cross - sx * sy) / math::sqrt(vx * vy))
}
