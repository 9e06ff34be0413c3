//! Iterative controlled blurring of the search image.
//!
//! Each iteration blurs the previous image once more, copies original content
//! back wherever a window's fidelity to the original falls below `lambda`,
//! and re-runs group size selection. Iterations continue while the estimated
//! cost drops by at least `stop_fraction` of the new cost.

use alloc::vec::Vec;

use crate::autocorr::AutoCorrMap;
use crate::blur::{blur, changed_windows, blur_fidelity_map_with_stats, quality_threshold, repair_until_faithful, BlurKernel};
use crate::egs::{efficient_group_size_with_stats, CostEstimate, EgsParams, EgsResult, EgsStep};
use crate::error::{Error, Result};
use crate::grid::GroupGrid;
use crate::image::{Image, Location};
use crate::stats::WindowStats;

#[derive(Debug, Clone, PartialEq)]
pub struct OptaParams {
    pub rho_th: f64,
    pub rho_max: f64,
    pub kernel: BlurKernel,
    pub initial_size: usize,
    /// Group size selection stopping fraction.
    pub xi_fraction: f64,
    /// Minimum relative cost improvement to accept another blur iteration.
    pub stop_fraction: f64,
    pub max_iterations: usize,
    pub templates_per_image: Option<usize>,
}

impl Default for OptaParams {
    fn default() -> Self {
        Self {
            rho_th: 0.8,
            rho_max: 0.95,
            kernel: BlurKernel::default(),
            initial_size: 3,
            xi_fraction: 0.005,
            stop_fraction: 0.005,
            max_iterations: 64,
            templates_per_image: None,
        }
    }
}

impl OptaParams {
    fn egs_params(&self, initial_size: usize) -> EgsParams {
        EgsParams {
            initial_size,
            rho_tb: self.rho_th,
            xi_fraction: self.xi_fraction,
            templates_per_image: self.templates_per_image,
            max_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptaIteration {
    pub h: usize,
    pub w: usize,
    pub cost: CostEstimate,
    /// Locations whose original content was copied back this iteration.
    pub restored: usize,
    pub accepted: bool,
    pub egs_trace: Vec<EgsStep>,
}

#[derive(Debug, Clone)]
pub struct OptaResult {
    pub blurred: Image,
    pub h_e: usize,
    pub w_e: usize,
    pub autocorr: AutoCorrMap,
    pub cost: CostEstimate,
    /// Iterations executed, counting the initial unblurred pass.
    pub kappa: usize,
    /// Blur passes applied to `blurred`.
    pub blur_passes: usize,
    pub lambda: f64,
    pub trace: Vec<OptaIteration>,
}

impl OptaResult {
    pub fn grid(&self) -> GroupGrid {
        let (rows, cols) = self.autocorr.extent();
        GroupGrid::new(rows, cols, self.h_e, self.w_e).expect("accepted group size is valid")
    }

    /// Radius of the combined blur support of the returned image.
    pub fn support_radius(&self, kernel: &BlurKernel) -> usize {
        kernel.radius() * self.blur_passes
    }
}

fn iteration(egs: &EgsResult, restored: usize, accepted: bool) -> OptaIteration {
    OptaIteration { h: egs.h_e, w: egs.w_e, cost: egs.cost, restored, accepted, egs_trace: egs.trace.clone() }
}

pub fn optimize_autocorrelation(img: &Image, m: usize, n: usize, params: &OptaParams) -> Result<OptaResult> {
    let lambda = quality_threshold(params.rho_th, params.rho_max)?;
    if !(params.stop_fraction >= 0.0) {
        return Err(Error::InvalidParameter("stop fraction must be non-negative"));
    }
    let stats = WindowStats::new(img, m, n)?;
    let first = efficient_group_size_with_stats(img, &stats, &params.egs_params(params.initial_size))?;

    let mut trace = alloc::vec![iteration(&first, 0, true)];
    let mut best = (img.clone(), first, 0usize);
    for _ in 0..params.max_iterations {
        let mut next = blur(&best.0, &params.kernel);
        let restored = repair_until_faithful(img, &stats, &mut next, lambda)?;
        let next_stats = WindowStats::new(&next, m, n)?;
        let egs = efficient_group_size_with_stats(&next, &next_stats, &params.egs_params(best.1.h_e))?;
        let prev = best.1.cost.total;
        let accepted = prev - egs.cost.total >= params.stop_fraction * egs.cost.total && egs.cost.total < prev;
        trace.push(iteration(&egs, restored, accepted));
        if !accepted {
            break;
        }
        let passes = best.2 + 1;
        best = (next, egs, passes);
    }

    let (blurred, egs, blur_passes) = best;
    Ok(OptaResult {
        blurred,
        h_e: egs.h_e,
        w_e: egs.w_e,
        autocorr: egs.autocorr,
        cost: egs.cost,
        kappa: trace.len(),
        blur_passes,
        lambda,
        trace,
    })
}

/// Locations whose window still holds blurred pixels but whose fidelity is
/// below `lambda`. Empty for every [`OptaResult`].
pub fn fidelity_violations(original: &Image, blurred: &Image, m: usize, n: usize, lambda: f64) -> Result<Vec<Location>> {
    let stats = WindowStats::new(original, m, n)?;
    let fid = blur_fidelity_map_with_stats(original, &stats, blurred)?;
    let changed = changed_windows(original, blurred);
    let (rows, cols) = stats.extent();
    Ok((0..rows)
        .flat_map(|r| (0..cols).map(move |c| Location::new(r, c)))
        .filter(|&loc| changed.window_sum(loc.row, loc.col, m, n) > 0.0 && fid.get(loc) < lambda)
        .collect())
}
