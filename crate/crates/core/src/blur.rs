//! Blur kernels, blur fidelity and content restoration.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{Image, Location};
use crate::math;
use crate::stats::{rho_from_sums, WindowStats};
use crate::sumtable::PrefixSum;

/// The 1-D profile applied along rows and then columns by default.
pub const DEFAULT_PROFILE: [f64; 5] = [0.05, 0.20, 0.50, 0.20, 0.05];

/// A normalized averaging filter on a `(2d+1) x (2d+1)` support.
#[derive(Debug, Clone, PartialEq)]
pub enum BlurKernel {
    /// 1-D profile of length `2d+1` applied along both axes.
    Separable { profile: Vec<f64> },
    /// Row-major 2-D weights.
    Full { radius: usize, weights: Vec<f64> },
}

fn normalized(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidParameter("blur weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter("blur weights must not all be zero"));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

impl BlurKernel {
    pub fn separable(profile: &[f64]) -> Result<Self> {
        if profile.len() % 2 == 0 {
            return Err(Error::InvalidParameter("blur profile length must be odd"));
        }
        Ok(Self::Separable { profile: normalized(profile)? })
    }

    pub fn full(radius: usize, weights: &[f64]) -> Result<Self> {
        let side = 2 * radius + 1;
        if weights.len() != side * side {
            return Err(Error::InvalidParameter("2-D blur weights must be (2d+1)^2"));
        }
        Ok(Self::Full { radius, weights: normalized(weights)? })
    }

    /// Identity blur.
    pub fn delta() -> Self {
        Self::Separable { profile: vec![1.0] }
    }

    pub fn radius(&self) -> usize {
        match self {
            Self::Separable { profile } => profile.len() / 2,
            Self::Full { radius, .. } => *radius,
        }
    }

    /// Weight at offset `(i, j)` from the center, each in `[-d, d]`.
    pub fn weight(&self, i: isize, j: isize) -> f64 {
        let d = self.radius() as isize;
        if i.abs() > d || j.abs() > d {
            return 0.0;
        }
        match self {
            Self::Separable { profile } => profile[(i + d) as usize] * profile[(j + d) as usize],
            Self::Full { weights, .. } => weights[((i + d) * (2 * d + 1) + j + d) as usize],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.radius() == 0
    }
}

impl Default for BlurKernel {
    fn default() -> Self {
        Self::separable(&DEFAULT_PROFILE).expect("default profile is valid")
    }
}

/// Gaussian kernel with support radius `ceil(sqrt(-2 sigma ln t))`, where
/// `t` is the smallest nonzero filter value.
pub fn gaussian_kernel(sigma: f64, t: f64) -> Result<BlurKernel> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter("gaussian sigma must be positive"));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter("gaussian cutoff must lie in (0, 1)"));
    }
    let d = math::ceil(math::sqrt(-2.0 * sigma * math::ln(t)));
    gaussian_kernel_with_radius(sigma, d as usize)
}

/// Gaussian kernel with an explicit support radius.
pub fn gaussian_kernel_with_radius(sigma: f64, radius: usize) -> Result<BlurKernel> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter("gaussian sigma must be positive"));
    }
    let d = radius as isize;
    let mut weights = Vec::with_capacity((2 * radius + 1).pow(2));
    for i in -d..=d {
        for j in -d..=d {
            weights.push(math::exp(-((i * i + j * j) as f64) / (2.0 * sigma * sigma)));
        }
    }
    BlurKernel::full(radius, &weights)
}

fn convolve_rows(src: &Image, profile: &[f64]) -> Image {
    let (w, h) = (src.width(), src.height());
    let d = (profile.len() / 2) as isize;
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h {
        let row = src.row(r);
        for c in 0..w as isize {
            let mut acc = 0.0;
            for (k, wt) in profile.iter().enumerate() {
                let cc = (c + k as isize - d).clamp(0, w as isize - 1) as usize;
                acc += wt * row[cc];
            }
            out.push(acc);
        }
    }
    Image::new(w, h, out).expect("same shape")
}

fn convolve_cols(src: &Image, profile: &[f64]) -> Image {
    let (w, h) = (src.width(), src.height());
    let d = (profile.len() / 2) as isize;
    let mut out = vec![0.0; w * h];
    for r in 0..h as isize {
        let dst = &mut out[r as usize * w..(r as usize + 1) * w];
        for (k, wt) in profile.iter().enumerate() {
            let rr = (r + k as isize - d).clamp(0, h as isize - 1) as usize;
            for (o, v) in dst.iter_mut().zip(src.row(rr)) {
                *o += wt * v;
            }
        }
    }
    Image::new(w, h, out).expect("same shape")
}

/// Weighted neighborhood average of every pixel, replicating border pixels.
pub fn blur(img: &Image, kernel: &BlurKernel) -> Image {
    match kernel {
        BlurKernel::Separable { profile } => convolve_cols(&convolve_rows(img, profile), profile),
        BlurKernel::Full { radius, weights } => {
            let (w, h) = (img.width() as isize, img.height() as isize);
            let d = *radius as isize;
            let side = (2 * d + 1) as usize;
            Image::from_fn(img.width(), img.height(), |r, c| {
                let mut acc = 0.0;
                for i in -d..=d {
                    let rr = (r as isize + i).clamp(0, h - 1) as usize;
                    let row = img.row(rr);
                    for j in -d..=d {
                        let cc = (c as isize + j).clamp(0, w - 1) as usize;
                        acc += weights[(i + d) as usize * side + (j + d) as usize] * row[cc];
                    }
                }
                acc
            })
            .expect("same shape")
        }
    }
}

/// Minimum blur fidelity `lambda` that keeps a peak of height `rho_max`
/// above `rho_th` after blurring.
pub fn quality_threshold(rho_th: f64, rho_max: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho_th) || !(0.0..=1.0).contains(&rho_max) {
        return Err(Error::InvalidParameter("rho_th and rho_max must lie in [0, 1]"));
    }
    if rho_max < rho_th {
        return Err(Error::InvalidParameter("rho_max must not be below rho_th"));
    }
    let radicand = 1.0 + rho_th * rho_th * rho_max * rho_max - (rho_th * rho_th + rho_max * rho_max);
    Ok(rho_th * rho_max + math::sqrt_pos(radicand))
}

/// Correlation between each original window and the same window of the
/// blurred image.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityMap {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl FidelityMap {
    pub fn extent(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, loc: Location) -> f64 {
        self.values[loc.row * self.cols + loc.col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn blur_fidelity_map(original: &Image, blurred: &Image, m: usize, n: usize) -> Result<FidelityMap> {
    let stats = WindowStats::new(original, m, n)?;
    blur_fidelity_map_with_stats(original, &stats, blurred)
}

/// Fidelity from running sums of the product of both (centered) images.
pub(crate) fn blur_fidelity_map_with_stats(
    original: &Image,
    stats: &WindowStats,
    blurred: &Image,
) -> Result<FidelityMap> {
    original.same_shape(blurred)?;
    let (m, n) = (stats.window_height(), stats.window_width());
    let (rows, cols) = stats.extent();
    let bstats = WindowStats::new(blurred, m, n)?;
    let (oa, ob) = (stats.offset(), bstats.offset());
    let product: Vec<f64> = original.data().iter().zip(blurred.data()).map(|(a, b)| (a - oa) * (b - ob)).collect();
    let prefix = PrefixSum::new(&product, original.width(), original.height());
    let mn = (m * n) as f64;
    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            values.push(rho_from_sums(
                mn,
                prefix.window_sum(r, c, m, n),
                stats.centered_sum(r, c),
                stats.var_num(r, c),
                bstats.centered_sum(r, c),
                bstats.var_num(r, c),
            ));
        }
    }
    Ok(FidelityMap { rows, cols, values })
}

fn copy_block(dst: &mut Image, src: &Image, loc: Location, m: usize, n: usize) {
    let w = src.width();
    for r in loc.row..loc.row + m {
        let range = r * w + loc.col..r * w + loc.col + n;
        dst.data_mut()[range.clone()].copy_from_slice(&src.data()[range]);
    }
}

/// Copies the original `m x n` block back at every location whose fidelity
/// is below `lambda`. The violation set is fixed before any copy, and all
/// copies read the original, so overlapping blocks are harmless.
pub fn unblur_violations(
    blurred: &Image,
    original: &Image,
    fidelity: &FidelityMap,
    lambda: f64,
    m: usize,
    n: usize,
) -> Result<(Image, usize)> {
    original.same_shape(blurred)?;
    let (rows, cols) = original.extent(m, n)?;
    if fidelity.extent() != (rows, cols) {
        return Err(Error::ShapeMismatch { expected: (rows, cols), found: fidelity.extent() });
    }
    let violations: Vec<Location> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| Location::new(r, c)))
        .filter(|&loc| fidelity.get(loc) < lambda)
        .collect();
    let mut out = blurred.clone();
    for &loc in &violations {
        copy_block(&mut out, original, loc, m, n);
    }
    Ok((out, violations.len()))
}

/// Restores original content until every window that still holds blurred
/// pixels has fidelity at least `lambda`. Returns the number of locations
/// restored.
pub(crate) fn repair_until_faithful(
    original: &Image,
    stats: &WindowStats,
    blurred: &mut Image,
    lambda: f64,
) -> Result<usize> {
    let (m, n) = (stats.window_height(), stats.window_width());
    let (rows, cols) = stats.extent();
    let mut restored = 0;
    loop {
        let fidelity = blur_fidelity_map_with_stats(original, stats, blurred)?;
        let changed = changed_windows(original, blurred);
        let violations: Vec<Location> = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| Location::new(r, c)))
            .filter(|&loc| changed.window_sum(loc.row, loc.col, m, n) > 0.0 && fidelity.get(loc) < lambda)
            .collect();
        if violations.is_empty() {
            return Ok(restored);
        }
        restored += violations.len();
        for &loc in &violations {
            copy_block(blurred, original, loc, m, n);
        }
    }
}

/// Running sums over the indicator of pixels that differ from the original.
pub(crate) fn changed_windows(original: &Image, blurred: &Image) -> PrefixSum {
    let diff: Vec<f64> = original
        .data()
        .iter()
        .zip(blurred.data())
        .map(|(a, b)| if a.to_bits() == b.to_bits() { 0.0 } else { 1.0 })
        .collect();
    PrefixSum::new(&diff, original.width(), original.height())
}
