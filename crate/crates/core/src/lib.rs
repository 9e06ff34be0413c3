//! Exhaustive-accuracy template matching with the correlation coefficient.
//!
//! The search image is tiled into groups of contiguous search locations. The
//! template is correlated only at group centers, and every other location is
//! bounded through its local auto-correlation with the center. Locations whose
//! upper bound cannot beat the best correlation found so far are skipped
//! without changing the result of an exhaustive search.
//!
//! On top of that core the crate provides
//! - [`egs`]: picks the group size minimising the estimated number of
//!   correlation evaluations,
//! - [`opta`]: blurs the search image where doing so cannot suppress a
//!   detectable match, raising auto-correlation and elimination,
//! - [`matcher`]: the two-scan search, localization refinement and mode
//!   orchestration.
//!
//! Everything here is `no_std` + `alloc`; file formats, the CLI and parallel
//! execution live in the `transmatch` crate.

#![no_std]

extern crate alloc;

pub mod autocorr;
pub mod blur;
pub mod bounds;
pub mod egs;
mod error;
pub mod grid;
pub mod image;
mod math;
pub mod matcher;
pub mod opta;
pub mod stats;
pub mod sumtable;
pub mod zncc;

pub use autocorr::{local_autocorrelation, AutoCorrMap};
pub use blur::{
    blur, blur_fidelity_map, gaussian_kernel, gaussian_kernel_with_radius, quality_threshold, unblur_violations,
    BlurKernel, FidelityMap,
};
pub use bounds::{
    elimination_autocorr_threshold, expected_elimination_threshold, sec_holds, transitive_bounds,
    transitive_gap, BoundPair,
};
pub use egs::{efficient_group_size, retained_count, total_cost, CostEstimate, EgsParams, EgsResult, EgsStep};
pub use error::{Error, Result};
pub use grid::{Group, GroupGrid};
pub use image::{Image, Location};
pub use matcher::{
    brute_force_match, center_scan, correlation_surface, match_template, refine_localization, transitive_search,
    Candidate, CenterScan, MatchMode, MatchParams, MatchResult, MatchStats, SearchOptions, SearchPlan, Threshold,
};
pub use opta::{fidelity_violations, optimize_autocorrelation, OptaIteration, OptaParams, OptaResult};
pub use stats::WindowStats;
pub use sumtable::{running_sum, PrefixSum, SumTable};
pub use zncc::{zncc, PreparedTemplate, Score, Scorer};
