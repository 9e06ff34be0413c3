//! Local auto-correlation of every search location with its group center.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::GroupGrid;
use crate::image::{Image, Location};
use crate::stats::{rho_from_sums, WindowStats};
use crate::sumtable::PrefixSum;

/// Correlation coefficient between the window at each search location and
/// the window at its group center. Centers hold exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoCorrMap {
    rows: usize,
    cols: usize,
    h: usize,
    w: usize,
    m: usize,
    n: usize,
    values: Vec<f64>,
    sum_tables_built: usize,
}

impl AutoCorrMap {
    /// Rebuilds a map from stored values, e.g. a cache file.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        rows: usize,
        cols: usize,
        h: usize,
        w: usize,
        m: usize,
        n: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let grid = GroupGrid::new(rows, cols, h, w)?;
        if values.len() != rows * cols {
            return Err(Error::InvalidDimensions { width: cols, height: rows, len: values.len() });
        }
        if values.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("auto-correlation entries must lie in [-1, 1]"));
        }
        if grid.groups().any(|g| values[g.center.row * cols + g.center.col] != 1.0) {
            return Err(Error::InvalidParameter("auto-correlation must be 1 at group centers"));
        }
        Ok(Self { rows, cols, h, w, m, n, values, sum_tables_built: 0 })
    }

    pub fn extent(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn group_size(&self) -> (usize, usize) {
        (self.h, self.w)
    }

    pub fn template_size(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    #[inline]
    pub fn get(&self, loc: Location) -> f64 {
        self.values[loc.row * self.cols + loc.col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of shifted-product running-sum tables built, one per nonzero offset.
    pub fn sum_tables_built(&self) -> usize {
        self.sum_tables_built
    }

    pub fn matches_grid(&self, grid: &GroupGrid) -> bool {
        grid.extent() == (self.rows, self.cols) && (grid.group_height(), grid.group_width()) == (self.h, self.w)
    }
}

/// Builds the auto-correlation map for template size `m x n` on `grid`.
pub fn local_autocorrelation(img: &Image, m: usize, n: usize, grid: &GroupGrid) -> Result<AutoCorrMap> {
    let stats = WindowStats::new(img, m, n)?;
    local_autocorrelation_with_stats(img, &stats, grid)
}

/// [`local_autocorrelation`] reusing precomputed window statistics of `img`.
///
/// For each nonzero offset `d` the image is multiplied with its shifted copy,
/// one running-sum table is built over the product, and every center `c` whose
/// member `c + d` lies in the same tile reads its cross sum in four lookups.
pub fn local_autocorrelation_with_stats(img: &Image, stats: &WindowStats, grid: &GroupGrid) -> Result<AutoCorrMap> {
    let (m, n) = (stats.window_height(), stats.window_width());
    let (rows, cols) = img.extent(m, n)?;
    stats.check_extent(rows, cols)?;
    if grid.extent() != (rows, cols) {
        return Err(Error::GridMismatch);
    }
    let (p, q) = (img.height(), img.width());
    let offset = stats.offset();
    let centered: Vec<f64> = img.data().iter().map(|&v| v - offset).collect();
    let mn = (m * n) as f64;

    let mut values = vec![0.0; rows * cols];
    let groups: Vec<_> = grid.groups().collect();
    for g in &groups {
        values[g.center.row * cols + g.center.col] = 1.0;
    }

    let reach_r = (grid.group_height() / 2).min(rows - 1) as isize;
    let reach_c = (grid.group_width() / 2).min(cols - 1) as isize;
    let mut product = Vec::with_capacity(p * q);
    let mut tables = 0;
    for di in -reach_r..=reach_r {
        for dj in -reach_c..=reach_c {
            if di == 0 && dj == 0 {
                continue;
            }
            // Product over the rows/cols where both the pixel and its shift exist.
            let r0 = (-di).max(0) as usize;
            let r1 = p - di.max(0) as usize;
            let c0 = (-dj).max(0) as usize;
            let c1 = q - dj.max(0) as usize;
            product.clear();
            for y in r0..r1 {
                let a = &centered[y * q + c0..y * q + c1];
                let ys = (y as isize + di) as usize;
                let xs = (c0 as isize + dj) as usize;
                let b = &centered[ys * q + xs..ys * q + xs + (c1 - c0)];
                product.extend(a.iter().zip(b).map(|(x, y)| x * y));
            }
            let prefix = PrefixSum::new(&product, c1 - c0, r1 - r0);
            tables += 1;

            for g in &groups {
                let c = g.center;
                let (or, oc) = (c.row as isize + di, c.col as isize + dj);
                if or < 0 || oc < 0 {
                    continue;
                }
                let o = Location::new(or as usize, oc as usize);
                if !g.contains(o) {
                    continue;
                }
                let cross = prefix.window_sum(c.row - r0, c.col - c0, m, n);
                values[o.row * cols + o.col] = rho_from_sums(
                    mn,
                    cross,
                    stats.centered_sum(c.row, c.col),
                    stats.var_num(c.row, c.col),
                    stats.centered_sum(o.row, o.col),
                    stats.var_num(o.row, o.col),
                );
            }
        }
    }

    Ok(AutoCorrMap {
        rows,
        cols,
        h: grid.group_height(),
        w: grid.group_width(),
        m,
        n,
        values,
        sum_tables_built: tables,
    })
}
