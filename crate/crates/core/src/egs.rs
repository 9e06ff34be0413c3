//! Cost model and efficient group size selection.
//!
//! Costs are measured in full correlation evaluations (`c_rho = 1`). The
//! estimated total for a group size is the number of groups (one correlation
//! per center) plus the number of members expected to fail elimination.

use alloc::vec::Vec;

use crate::autocorr::{local_autocorrelation_with_stats, AutoCorrMap};
use crate::bounds::expected_elimination_threshold;
use crate::error::{Error, Result};
use crate::grid::GroupGrid;
use crate::image::Image;
use crate::stats::WindowStats;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    /// `c_c`: correlations at group centers, i.e. the number of groups.
    pub central: f64,
    /// `c_r`: correlations at retained members.
    pub retained_cost: f64,
    pub retained: usize,
    /// `c_a / n_t`, when auto-correlation cost is amortized into the total.
    pub amortized: Option<f64>,
    pub total: f64,
}

/// Number of members (centers excluded) whose auto-correlation is strictly
/// below `sqrt(1 - rho_tb^2)`.
pub fn retained_count(map: &AutoCorrMap, rho_tb: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&rho_tb) {
        return Err(Error::InvalidParameter("threshold must lie in [0, 1]"));
    }
    let threshold = expected_elimination_threshold(rho_tb)?;
    let (rows, cols) = map.extent();
    let (h, w) = map.group_size();
    let grid = GroupGrid::new(rows, cols, h, w)?;
    Ok(grid
        .groups()
        .map(|g| g.members().filter(|&o| map.get(o) < threshold).count())
        .sum())
}

/// Total estimated cost for an `extent_rows x extent_cols` search extent
/// tiled into `h x w` groups.
pub fn total_cost(
    extent_rows: usize,
    extent_cols: usize,
    h: usize,
    w: usize,
    retained: usize,
    amortized: Option<f64>,
) -> Result<CostEstimate> {
    if h == 0 || w == 0 {
        return Err(Error::InvalidGroupSize { h, w });
    }
    let central = (extent_rows.div_ceil(h) * extent_cols.div_ceil(w)) as f64;
    let retained_cost = retained as f64;
    Ok(CostEstimate {
        central,
        retained_cost,
        retained,
        amortized,
        total: central + retained_cost + amortized.unwrap_or(0.0),
    })
}

/// Auto-correlation cost per template in correlation units: one
/// multiply-accumulate per location and nonzero offset, over `mn` per
/// correlation, shared by `templates` templates.
pub fn amortized_autocorr_cost(extent_size: usize, h: usize, w: usize, m: usize, n: usize, templates: usize) -> f64 {
    ((h * w - 1) * extent_size) as f64 / ((m * n) as f64 * templates.max(1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgsParams {
    /// Initial (square, odd) group size.
    pub initial_size: usize,
    /// Threshold used to predict elimination.
    pub rho_tb: f64,
    /// `xi` as a fraction of the previous accepted cost.
    pub xi_fraction: f64,
    /// Amortize auto-correlation cost over this many templates.
    pub templates_per_image: Option<usize>,
    /// Never grow beyond this group size.
    pub max_size: Option<usize>,
}

impl Default for EgsParams {
    fn default() -> Self {
        Self { initial_size: 3, rho_tb: 0.8, xi_fraction: 0.005, templates_per_image: None, max_size: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgsStep {
    pub h: usize,
    pub w: usize,
    pub cost: CostEstimate,
    /// The improvement over the previous accepted size exceeded `xi`.
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct EgsResult {
    pub h_e: usize,
    pub w_e: usize,
    pub autocorr: AutoCorrMap,
    pub cost: CostEstimate,
    pub trace: Vec<EgsStep>,
}

impl EgsResult {
    pub fn grid(&self) -> GroupGrid {
        let (rows, cols) = self.autocorr.extent();
        GroupGrid::new(rows, cols, self.h_e, self.w_e).expect("accepted group size is valid")
    }
}

/// Grows the group size by 2 in both directions while the estimated total
/// cost keeps dropping by more than `xi_fraction` of the last accepted cost.
///
/// The first size is always accepted. Growth also stops once a single group
/// spans the whole extent, since larger sizes tile it identically.
pub fn efficient_group_size(img: &Image, m: usize, n: usize, params: &EgsParams) -> Result<EgsResult> {
    let stats = WindowStats::new(img, m, n)?;
    efficient_group_size_with_stats(img, &stats, params)
}

pub(crate) fn efficient_group_size_with_stats(img: &Image, stats: &WindowStats, params: &EgsParams) -> Result<EgsResult> {
    let h0 = params.initial_size;
    if h0 == 0 || h0 % 2 == 0 {
        return Err(Error::InvalidGroupSize { h: h0, w: h0 });
    }
    if !(params.rho_tb > 0.0 && params.rho_tb < 1.0) {
        return Err(Error::InvalidParameter("EGS threshold must lie in (0, 1)"));
    }
    if params.xi_fraction.is_nan() || params.xi_fraction < 0.0 {
        return Err(Error::InvalidParameter("xi fraction must be non-negative"));
    }
    let (m, n) = (stats.window_height(), stats.window_width());
    let (rows, cols) = stats.extent();

    let mut trace = Vec::new();
    let mut best: Option<(usize, AutoCorrMap, CostEstimate)> = None;
    let mut size = h0;
    loop {
        let grid = GroupGrid::new(rows, cols, size, size)?;
        let map = local_autocorrelation_with_stats(img, stats, &grid)?;
        let retained = retained_count(&map, params.rho_tb)?;
        let amortized = params
            .templates_per_image
            .map(|nt| amortized_autocorr_cost(rows * cols, size, size, m, n, nt));
        let cost = total_cost(rows, cols, size, size, retained, amortized)?;
        let accepted = match &best {
            None => true,
            Some((_, _, prev)) => prev.total - cost.total > params.xi_fraction * prev.total,
        };
        trace.push(EgsStep { h: size, w: size, cost, accepted });
        if !accepted {
            break;
        }
        best = Some((size, map, cost));
        let spans_extent = size >= rows && size >= cols;
        let next = size + 2;
        if spans_extent || params.max_size.is_some_and(|cap| next > cap) {
            break;
        }
        size = next;
    }
    let (size, autocorr, cost) = best.expect("first iteration is always accepted");
    Ok(EgsResult { h_e: size, w_e: size, autocorr, cost, trace })
}
