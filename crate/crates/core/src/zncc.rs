//! The correlation coefficient (zero-mean normalized cross-correlation).

use alloc::borrow::Cow;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{Image, Location, Window};
use crate::math;
use crate::stats::{WindowStats, FLAT_RELATIVE};

/// Correlation coefficient of two equally sized windows, computed directly
/// from the definition in two passes.
///
/// Returns 0 when either window is flat (zero variance). The result is
/// clamped to `[-1, 1]`.
pub fn zncc(a: &Window<'_>, b: &Window<'_>) -> Result<f64> {
    if (a.height(), a.width()) != (b.height(), b.width()) {
        return Err(Error::ShapeMismatch {
            expected: (a.height(), a.width()),
            found: (b.height(), b.width()),
        });
    }
    Ok(math::clamp_unit(zncc_unclamped(a.values(), b.values())))
}

/// [`zncc`] over two equal-length slices.
pub fn zncc_slices(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::ShapeMismatch { expected: (1, a.len()), found: (1, b.len()) });
    }
    Ok(math::clamp_unit(zncc_unclamped(a.iter().copied(), b.iter().copied())))
}

pub(crate) fn zncc_unclamped(
    a: impl Iterator<Item = f64> + Clone,
    b: impl Iterator<Item = f64> + Clone,
) -> f64 {
    let (mut sa, mut sb, mut len) = (0.0, 0.0, 0usize);
    for (x, y) in a.clone().zip(b.clone()) {
        sa += x;
        sb += y;
        len += 1;
    }
    let (mu_a, mu_b) = (sa / len as f64, sb / len as f64);
    let (mut cross, mut ssa, mut ssb, mut qa, mut qb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in a.zip(b) {
        let (da, db) = (x - mu_a, y - mu_b);
        cross += da * db;
        ssa += da * da;
        ssb += db * db;
        qa += x * x;
        qb += y * y;
    }
    if ssa <= FLAT_RELATIVE * qa || ssb <= FLAT_RELATIVE * qb {
        return 0.0;
    }
    cross / math::sqrt(ssa * ssb)
}

/// A template with its mean removed and its norm precomputed.
#[derive(Debug, Clone)]
pub struct PreparedTemplate {
    m: usize,
    n: usize,
    centered: Vec<f64>,
    centered_sum: f64,
    norm: f64,
}

impl PreparedTemplate {
    pub fn new(template: &Image) -> Result<Self> {
        let data = template.data();
        let mu = template.mean();
        let centered: Vec<f64> = data.iter().map(|&v| v - mu).collect();
        let ss: f64 = centered.iter().map(|v| v * v).sum();
        let q: f64 = data.iter().map(|v| v * v).sum();
        if ss <= FLAT_RELATIVE * q || ss == 0.0 {
            return Err(Error::FlatTemplate);
        }
        Ok(Self {
            m: template.height(),
            n: template.width(),
            centered_sum: centered.iter().sum(),
            centered,
            norm: math::sqrt(ss),
        })
    }

    /// Template height `m`.
    pub fn height(&self) -> usize {
        self.m
    }

    /// Template width `n`.
    pub fn width(&self) -> usize {
        self.n
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Correlation at one search location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub rho: f64,
    /// The image window is flat; `rho` is the conventional 0.
    pub flat: bool,
}

/// Evaluates a prepared template against every placement in one image.
///
/// Uses `sum t'(i,j) I(x+i,y+j) - mu_o sum t'` over `sigma_t * Omega_o`, with
/// `Omega_o` from running sums. Every matcher in the crate scores through
/// this type, so equal locations always get bit-identical values.
#[derive(Debug, Clone)]
pub struct Scorer<'a> {
    template: &'a PreparedTemplate,
    image: &'a Image,
    stats: Cow<'a, WindowStats>,
}

impl<'a> Scorer<'a> {
    pub fn new(template: &'a PreparedTemplate, image: &'a Image) -> Result<Self> {
        let stats = WindowStats::new(image, template.m, template.n)?;
        Ok(Self { template, image, stats: Cow::Owned(stats) })
    }

    /// Scorer reusing statistics already computed for `image`.
    pub fn with_stats(template: &'a PreparedTemplate, image: &'a Image, stats: &'a WindowStats) -> Result<Self> {
        let (rows, cols) = image.extent(template.m, template.n)?;
        if (stats.window_height(), stats.window_width()) != (template.m, template.n) {
            return Err(Error::ShapeMismatch {
                expected: (template.m, template.n),
                found: (stats.window_height(), stats.window_width()),
            });
        }
        stats.check_extent(rows, cols)?;
        Ok(Self { template, image, stats: Cow::Borrowed(stats) })
    }

    pub fn extent(&self) -> (usize, usize) {
        self.stats.extent()
    }

    pub fn stats(&self) -> &WindowStats {
        &self.stats
    }

    pub fn image(&self) -> &Image {
        self.image
    }

    pub fn score(&self, loc: Location) -> Score {
        let (r, c) = (loc.row, loc.col);
        if self.stats.is_flat(r, c) {
            return Score { rho: 0.0, flat: true };
        }
        let t = self.template;
        let mut acc = 0.0;
        for i in 0..t.m {
            let img_row = &self.image.row(r + i)[c..c + t.n];
            acc += math::dot(&t.centered[i * t.n..(i + 1) * t.n], img_row);
        }
        let num = acc - self.stats.mean(r, c) * t.centered_sum;
        let rho = num / (t.norm * self.stats.sigma(r, c));
        Score { rho: math::clamp_unit(rho), flat: false }
    }
}
