//! Transitive elimination search and its orchestration.
//!
//! The search runs in two scans. The first correlates the template with
//! every group center and keeps the maximum, which becomes the initial
//! threshold `rho_tb`. The second visits every member location: members whose
//! transitive upper bound cannot exceed `rho_tb` are eliminated, the rest are
//! correlated and tighten `rho_tb` when they beat it.

use alloc::vec::Vec;

use crate::autocorr::AutoCorrMap;
use crate::bounds::upper_bound;
use crate::egs::{efficient_group_size, EgsParams};
use crate::error::{Error, Result};
use crate::grid::{Group, GroupGrid};
use crate::image::{Image, Location};
use crate::opta::{optimize_autocorrelation, OptaParams};
use crate::stats::WindowStats;
use crate::zncc::{PreparedTemplate, Score, Scorer};

/// A scored search location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub loc: Location,
    pub rho: f64,
    pub flat: bool,
}

impl Candidate {
    fn new(loc: Location, score: Score) -> Self {
        Self { loc, rho: score.rho, flat: score.flat }
    }

    /// Non-flat beats flat, then higher correlation, then earlier position.
    pub fn beats(&self, other: &Candidate) -> bool {
        match (self.flat, other.flat) {
            (false, true) => true,
            (true, false) => false,
            _ => self.rho > other.rho || (self.rho == other.rho && self.loc < other.loc),
        }
    }
}

fn keep_better(best: &mut Option<Candidate>, cand: Candidate) {
    if best.as_ref().is_none_or(|b| cand.beats(b)) {
        *best = Some(cand);
    }
}

/// The elimination threshold `rho_tb` and the location that achieved it.
///
/// `holder` is `None` when the value is a user threshold above anything
/// achieved so far. A member whose upper bound equals the value exactly is
/// only eliminated when it would lose the positional tie-break anyway.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub value: f64,
    pub holder: Option<Location>,
}

impl Threshold {
    /// Combines the best achieved candidate with a user threshold. Flat
    /// candidates never set the threshold.
    pub fn from_parts(achieved: Option<Candidate>, user: Option<f64>) -> Option<Self> {
        let achieved = achieved.filter(|c| !c.flat).map(|c| Threshold { value: c.rho, holder: Some(c.loc) });
        match (achieved, user) {
            (Some(a), Some(u)) if u > a.value => Some(Threshold { value: u, holder: None }),
            (Some(a), _) => Some(a),
            (None, Some(u)) => Some(Threshold { value: u, holder: None }),
            (None, None) => None,
        }
    }

    #[inline]
    fn eliminates(&self, upper: f64, member: Location) -> bool {
        upper < self.value || (upper == self.value && self.holder.is_none_or(|h| h < member))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MatchStats {
    /// Correlations evaluated at group centers.
    pub centers: usize,
    /// Members skipped by the elimination condition.
    pub eliminated: usize,
    /// Members that failed elimination and were evaluated.
    pub retained: usize,
    pub extent: usize,
    /// Extra correlations spent on localization refinement.
    pub refine_evaluations: usize,
    /// Wall time, filled in by callers that have a clock.
    pub elapsed_ms: Option<f64>,
}

impl MatchStats {
    pub fn elimination_pct(&self) -> f64 {
        if self.extent == 0 {
            return 0.0;
        }
        self.eliminated as f64 / self.extent as f64 * 100.0
    }

    /// Total full-correlation evaluations.
    pub fn operations(&self) -> usize {
        self.centers + self.retained + self.refine_evaluations
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "lowercase"))]
pub enum MatchMode {
    Brute,
    Egs,
    Opta,
}

impl MatchMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatchMode::Brute => "brute",
            MatchMode::Egs => "egs",
            MatchMode::Opta => "opta",
        }
    }
}

impl core::str::FromStr for MatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(MatchMode::Brute),
            "egs" => Ok(MatchMode::Egs),
            "opta" => Ok(MatchMode::Opta),
            _ => Err(Error::InvalidParameter("mode must be one of brute, egs, opta")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchOptions {
    /// User threshold combined with the first-scan maximum by `max`.
    pub initial_threshold: Option<f64>,
    /// Keep the list of eliminated members and the threshold history.
    pub record: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub mode: MatchMode,
    /// Best location in the searched image.
    pub best: Candidate,
    /// Best location after refinement against the original image; equal to
    /// `best` when no refinement stage ran.
    pub refined: Candidate,
    pub stats: MatchStats,
    /// `rho_tb` at the end of the search.
    pub final_threshold: Option<f64>,
    pub group_size: (usize, usize),
    pub estimated_cost: Option<f64>,
    pub kappa: Option<usize>,
    /// Threshold a detection must reach, if any.
    pub detection_threshold: Option<f64>,
    pub eliminated: Vec<Location>,
    pub threshold_history: Vec<f64>,
}

impl MatchResult {
    /// Result of an exhaustive search over a `rows x cols` extent.
    pub fn exhaustive(best: Candidate, rows: usize, cols: usize) -> Self {
        MatchResult {
            mode: MatchMode::Brute,
            best,
            refined: best,
            stats: MatchStats { centers: rows * cols, extent: rows * cols, ..MatchStats::default() },
            final_threshold: (!best.flat).then_some(best.rho),
            group_size: (1, 1),
            estimated_cost: Some((rows * cols) as f64),
            kappa: None,
            detection_threshold: None,
            eliminated: Vec::new(),
            threshold_history: Vec::new(),
        }
    }

    pub fn detected(&self) -> bool {
        self.detection_threshold.is_none_or(|t| !self.refined.flat && self.refined.rho >= t)
    }
}

/// Result of the first scan over group centers.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterScan {
    /// Score at each group center, indexed like [`GroupGrid::group`].
    pub scores: Vec<Score>,
    pub best: Candidate,
}

impl CenterScan {
    pub fn max_rho(&self) -> f64 {
        self.best.rho
    }

    pub fn max_location(&self) -> Location {
        self.best.loc
    }
}

fn check_template(template: &PreparedTemplate, image: &Image) -> Result<()> {
    image.extent(template.height(), template.width()).map(|_| ())
}

/// Exhaustive search: correlation at every valid placement.
pub fn brute_force_match(template: &Image, image: &Image) -> Result<MatchResult> {
    let prepared = PreparedTemplate::new(template)?;
    check_template(&prepared, image)?;
    let scorer = Scorer::new(&prepared, image)?;
    Ok(brute_force_with_scorer(&scorer))
}

/// Full correlation surface, row-major over the search extent.
pub fn correlation_surface(template: &Image, image: &Image) -> Result<Vec<f64>> {
    let prepared = PreparedTemplate::new(template)?;
    check_template(&prepared, image)?;
    let scorer = Scorer::new(&prepared, image)?;
    let (rows, cols) = scorer.extent();
    Ok((0..rows)
        .flat_map(|r| (0..cols).map(move |c| Location::new(r, c)))
        .map(|loc| scorer.score(loc).rho)
        .collect())
}

pub(crate) fn brute_force_with_scorer(scorer: &Scorer<'_>) -> MatchResult {
    let (rows, cols) = scorer.extent();
    let mut best = None;
    for r in 0..rows {
        for c in 0..cols {
            let loc = Location::new(r, c);
            keep_better(&mut best, Candidate::new(loc, scorer.score(loc)));
        }
    }
    MatchResult::exhaustive(best.expect("extent is non-empty"), rows, cols)
}

/// First scan: the template against every group center.
pub fn center_scan(template: &Image, image: &Image, grid: &GroupGrid) -> Result<CenterScan> {
    let prepared = PreparedTemplate::new(template)?;
    let scorer = Scorer::new(&prepared, image)?;
    center_scan_with_scorer(&scorer, grid)
}

pub fn center_scan_with_scorer(scorer: &Scorer<'_>, grid: &GroupGrid) -> Result<CenterScan> {
    if grid.extent() != scorer.extent() {
        return Err(Error::GridMismatch);
    }
    let mut best = None;
    let scores = grid
        .groups()
        .map(|g| {
            let s = scorer.score(g.center);
            keep_better(&mut best, Candidate::new(g.center, s));
            s
        })
        .collect();
    Ok(CenterScan { scores, best: best.expect("grid has at least one group") })
}

/// Outcome of the second scan over one group's members.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupOutcome {
    pub best: Option<Candidate>,
    pub eliminated: usize,
    pub retained: usize,
    pub eliminated_locations: Vec<Location>,
}

/// Second scan over one group with a fixed threshold. Used by parallel
/// drivers, where every group sees the first-scan threshold.
pub fn process_group_frozen(
    scorer: &Scorer<'_>,
    map: &AutoCorrMap,
    group: &Group,
    center: Score,
    threshold: Option<Threshold>,
    record: bool,
) -> GroupOutcome {
    let mut out = GroupOutcome::default();
    let tc = center.rho;
    for o in group.members() {
        if let Some(t) = &threshold {
            if !scorer.stats().is_flat(o.row, o.col) && t.eliminates(upper_bound(tc, map.get(o)), o) {
                out.eliminated += 1;
                if record {
                    out.eliminated_locations.push(o);
                }
                continue;
            }
        }
        out.retained += 1;
        keep_better(&mut out.best, Candidate::new(o, scorer.score(o)));
    }
    out
}

/// Two-scan transitive search of `template` in `image`.
pub fn transitive_search(
    template: &Image,
    image: &Image,
    map: &AutoCorrMap,
    grid: &GroupGrid,
    options: &SearchOptions,
) -> Result<MatchResult> {
    let prepared = PreparedTemplate::new(template)?;
    check_template(&prepared, image)?;
    let scorer = Scorer::new(&prepared, image)?;
    transitive_search_with_scorer(&scorer, map, grid, options)
}

pub fn transitive_search_with_scorer(
    scorer: &Scorer<'_>,
    map: &AutoCorrMap,
    grid: &GroupGrid,
    options: &SearchOptions,
) -> Result<MatchResult> {
    if !map.matches_grid(grid) || grid.extent() != scorer.extent() {
        return Err(Error::GridMismatch);
    }
    if let Some(u) = options.initial_threshold {
        if !(-1.0..=1.0).contains(&u) {
            return Err(Error::CorrelationOutOfRange(u));
        }
    }
    let scan = center_scan_with_scorer(scorer, grid)?;
    let mut best = scan.best;
    let mut threshold = Threshold::from_parts(Some(best), options.initial_threshold);
    let mut history = Vec::new();
    if options.record {
        history.extend(threshold.map(|t| t.value));
    }

    let mut stats = MatchStats { centers: grid.group_count(), extent: grid.extent_size(), ..MatchStats::default() };
    let mut eliminated = Vec::new();
    for (group, center) in grid.groups().zip(&scan.scores) {
        let tc = center.rho;
        for o in group.members() {
            if let Some(t) = &threshold {
                if !scorer.stats().is_flat(o.row, o.col) && t.eliminates(upper_bound(tc, map.get(o)), o) {
                    stats.eliminated += 1;
                    if options.record {
                        eliminated.push(o);
                    }
                    continue;
                }
            }
            stats.retained += 1;
            let cand = Candidate::new(o, scorer.score(o));
            if cand.beats(&best) {
                best = cand;
                let tightened = Threshold::from_parts(Some(best), options.initial_threshold);
                if tightened != threshold {
                    threshold = tightened;
                    if options.record {
                        history.extend(threshold.map(|t| t.value));
                    }
                }
            }
        }
    }

    Ok(MatchResult {
        mode: MatchMode::Egs,
        best,
        refined: best,
        stats,
        final_threshold: threshold.map(|t| t.value),
        group_size: (grid.group_height(), grid.group_width()),
        estimated_cost: None,
        kappa: None,
        detection_threshold: options.initial_threshold,
        eliminated,
        threshold_history: history,
    })
}

/// Merges per-group outcomes of a frozen-threshold second scan.
pub fn merge_outcomes(
    scan: &CenterScan,
    grid: &GroupGrid,
    outcomes: impl IntoIterator<Item = GroupOutcome>,
    options: &SearchOptions,
) -> MatchResult {
    let mut best = scan.best;
    let mut stats = MatchStats { centers: grid.group_count(), extent: grid.extent_size(), ..MatchStats::default() };
    let mut eliminated = Vec::new();
    for out in outcomes {
        stats.eliminated += out.eliminated;
        stats.retained += out.retained;
        eliminated.extend(out.eliminated_locations);
        if let Some(c) = out.best {
            if c.beats(&best) {
                best = c;
            }
        }
    }
    eliminated.sort_unstable();
    let threshold = Threshold::from_parts(Some(best), options.initial_threshold);
    MatchResult {
        mode: MatchMode::Egs,
        best,
        refined: best,
        stats,
        final_threshold: threshold.map(|t| t.value),
        group_size: (grid.group_height(), grid.group_width()),
        estimated_cost: None,
        kappa: None,
        detection_threshold: options.initial_threshold,
        eliminated,
        threshold_history: Vec::new(),
    }
}

/// Exhaustive search of the `(2d+1) x (2d+1)` neighborhood of `loc`,
/// clipped to the search extent. Returns the best location and its score.
pub fn refine_localization(template: &Image, original: &Image, loc: Location, radius: usize) -> Result<Candidate> {
    let prepared = PreparedTemplate::new(template)?;
    check_template(&prepared, original)?;
    let scorer = Scorer::new(&prepared, original)?;
    refine_with_scorer(&scorer, loc, radius).map(|(c, _)| c)
}

pub(crate) fn refine_with_scorer(scorer: &Scorer<'_>, loc: Location, radius: usize) -> Result<(Candidate, usize)> {
    let (rows, cols) = scorer.extent();
    if loc.row >= rows || loc.col >= cols {
        return Err(Error::InvalidParameter("refinement location outside the search extent"));
    }
    let r_range = loc.row.saturating_sub(radius)..(loc.row + radius + 1).min(rows);
    let c_range = loc.col.saturating_sub(radius)..(loc.col + radius + 1).min(cols);
    let mut best = None;
    let mut evaluated = 0;
    for r in r_range {
        for c in c_range.clone() {
            let l = Location::new(r, c);
            keep_better(&mut best, Candidate::new(l, scorer.score(l)));
            evaluated += 1;
        }
    }
    Ok((best.expect("neighborhood contains loc"), evaluated))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchParams {
    pub egs: EgsParams,
    pub opta: OptaParams,
    pub initial_threshold: Option<f64>,
    pub record: bool,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self { egs: EgsParams::default(), opta: OptaParams::default(), initial_threshold: None, record: false }
    }
}

/// Everything about the search image that does not depend on the template:
/// the image actually searched, its window statistics, and for the fast
/// modes the auto-correlation map and grid. Build once, match many templates.
#[derive(Debug, Clone)]
pub struct SearchPlan {
    mode: MatchMode,
    m: usize,
    n: usize,
    original: Image,
    original_stats: WindowStats,
    /// Blurred image and its statistics in `Opta` mode.
    searched: Option<(Image, WindowStats)>,
    autocorr: Option<AutoCorrMap>,
    grid: GroupGrid,
    refine_radius: usize,
    estimated_cost: f64,
    kappa: Option<usize>,
    detection_threshold: Option<f64>,
}

impl SearchPlan {
    pub fn new(image: &Image, m: usize, n: usize, mode: MatchMode, params: &MatchParams) -> Result<Self> {
        let (rows, cols) = image.extent(m, n)?;
        let original_stats = WindowStats::new(image, m, n)?;
        let mut plan = SearchPlan {
            mode,
            m,
            n,
            original: image.clone(),
            original_stats,
            searched: None,
            autocorr: None,
            grid: GroupGrid::new(rows, cols, 1, 1)?,
            refine_radius: 0,
            estimated_cost: (rows * cols) as f64,
            kappa: None,
            detection_threshold: None,
        };
        match mode {
            MatchMode::Brute => {}
            MatchMode::Egs => {
                let egs = efficient_group_size(image, m, n, &params.egs)?;
                plan.grid = egs.grid();
                plan.estimated_cost = egs.cost.total;
                plan.autocorr = Some(egs.autocorr);
            }
            MatchMode::Opta => {
                let opta = optimize_autocorrelation(image, m, n, &params.opta)?;
                plan.grid = opta.grid();
                plan.refine_radius = opta.support_radius(&params.opta.kernel);
                plan.estimated_cost = opta.cost.total;
                plan.kappa = Some(opta.kappa);
                plan.detection_threshold = Some(params.opta.rho_th);
                let stats = WindowStats::new(&opta.blurred, m, n)?;
                plan.searched = Some((opta.blurred, stats));
                plan.autocorr = Some(opta.autocorr);
            }
        }
        Ok(plan)
    }

    pub fn mode(&self) -> MatchMode {
        self.mode
    }

    pub fn grid(&self) -> &GroupGrid {
        &self.grid
    }

    pub fn autocorr(&self) -> Option<&AutoCorrMap> {
        self.autocorr.as_ref()
    }

    /// The image the transitive search runs on (blurred in `Opta` mode).
    pub fn searched_image(&self) -> &Image {
        self.searched.as_ref().map_or(&self.original, |(img, _)| img)
    }

    pub fn refine_radius(&self) -> usize {
        self.refine_radius
    }

    pub fn estimated_cost(&self) -> f64 {
        self.estimated_cost
    }

    pub fn kappa(&self) -> Option<usize> {
        self.kappa
    }

    /// Scorer over the image the transitive search runs on.
    pub fn searched_scorer<'a>(&'a self, template: &'a PreparedTemplate) -> Result<Scorer<'a>> {
        match &self.searched {
            Some((img, stats)) => Scorer::with_stats(template, img, stats),
            None => Scorer::with_stats(template, &self.original, &self.original_stats),
        }
    }

    pub fn original_scorer<'a>(&'a self, template: &'a PreparedTemplate) -> Result<Scorer<'a>> {
        Scorer::with_stats(template, &self.original, &self.original_stats)
    }

    pub fn prepare(&self, template: &Image) -> Result<PreparedTemplate> {
        if (template.height(), template.width()) != (self.m, self.n) {
            return Err(Error::ShapeMismatch { expected: (self.m, self.n), found: (template.height(), template.width()) });
        }
        PreparedTemplate::new(template)
    }

    pub fn search(&self, template: &Image, options: &SearchOptions) -> Result<MatchResult> {
        let prepared = self.prepare(template)?;
        let scorer = self.searched_scorer(&prepared)?;
        let result = match (&self.autocorr, self.mode) {
            (Some(map), _) => transitive_search_with_scorer(&scorer, map, &self.grid, options)?,
            (None, _) => {
                let mut r = brute_force_with_scorer(&scorer);
                r.detection_threshold = options.initial_threshold;
                r
            }
        };
        self.finish(&prepared, result, options)
    }

    /// Applies refinement and plan metadata to a raw search result.
    pub fn finish(&self, prepared: &PreparedTemplate, mut result: MatchResult, options: &SearchOptions) -> Result<MatchResult> {
        result.mode = self.mode;
        result.estimated_cost = Some(self.estimated_cost);
        result.kappa = self.kappa;
        result.detection_threshold = options.initial_threshold.or(self.detection_threshold);
        if self.searched.is_some() {
            let scorer = self.original_scorer(prepared)?;
            let (refined, evaluated) = refine_with_scorer(&scorer, result.best.loc, self.refine_radius)?;
            result.refined = refined;
            result.stats.refine_evaluations = evaluated;
        }
        Ok(result)
    }
}

/// Matches `template` in `image` with the chosen mode.
pub fn match_template(template: &Image, image: &Image, mode: MatchMode, params: &MatchParams) -> Result<MatchResult> {
    PreparedTemplate::new(template)?;
    let plan = SearchPlan::new(image, template.height(), template.width(), mode, params)?;
    let options = SearchOptions { initial_threshold: params.initial_threshold, record: params.record };
    plan.search(template, &options)
}
