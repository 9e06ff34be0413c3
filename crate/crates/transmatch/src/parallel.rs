//! Multi-threaded search.
//!
//! Groups are processed independently against the threshold frozen at the
//! end of the first scan, so more members are evaluated than in the
//! sequential search but the reported location is the same.

use rayon::prelude::*;
use transmatch_core::matcher::{center_scan_with_scorer, merge_outcomes, process_group_frozen, Threshold};
use transmatch_core::{Candidate, Error, Image, Location, MatchResult, Result, Scorer, SearchOptions, SearchPlan};

fn better(a: Candidate, b: Candidate) -> Candidate {
    if b.beats(&a) {
        b
    } else {
        a
    }
}

/// Exhaustive search with rows split across threads.
pub fn par_brute_force(scorer: &Scorer<'_>) -> MatchResult {
    let (rows, cols) = scorer.extent();
    let best = (0..rows)
        .into_par_iter()
        .map(|r| {
            (0..cols)
                .map(|c| {
                    let loc = Location::new(r, c);
                    let s = scorer.score(loc);
                    Candidate { loc, rho: s.rho, flat: s.flat }
                })
                .reduce(better)
                .expect("extent has columns")
        })
        .reduce_with(better)
        .expect("extent has rows");
    MatchResult::exhaustive(best, rows, cols)
}

/// Parallel counterpart of [`SearchPlan::search`].
pub fn par_search(plan: &SearchPlan, template: &Image, options: &SearchOptions) -> Result<MatchResult> {
    if let Some(u) = options.initial_threshold.filter(|u| !(-1.0..=1.0).contains(u)) {
        return Err(Error::CorrelationOutOfRange(u));
    }
    let prepared = plan.prepare(template)?;
    let scorer = plan.searched_scorer(&prepared)?;
    let raw = match plan.autocorr() {
        None => {
            let mut r = par_brute_force(&scorer);
            r.detection_threshold = options.initial_threshold;
            r
        }
        Some(map) => {
            let grid = plan.grid();
            let scan = center_scan_with_scorer(&scorer, grid)?;
            let threshold = Threshold::from_parts(Some(scan.best), options.initial_threshold);
            let outcomes: Vec<_> = (0..grid.group_count())
                .into_par_iter()
                .map(|i| process_group_frozen(&scorer, map, &grid.group(i), scan.scores[i], threshold, options.record))
                .collect();
            merge_outcomes(&scan, grid, outcomes, options)
        }
    };
    plan.finish(&prepared, raw, options)
}
