//! Acceptance suite.
//!
//! Runs every acceptance criterion against independent oracles written here
//! (naive sums, two-pass correlation, exhaustive surfaces) and prints one
//! PASS/FAIL line per criterion. Exits non-zero when any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transmatch::synth::{generate, smoothed_noise, Corpus, SynthSpec};
use transmatch_core::{
    blur_fidelity_map, brute_force_match, correlation_surface, efficient_group_size, local_autocorrelation,
    optimize_autocorrelation, quality_threshold, retained_count, running_sum, total_cost, transitive_bounds,
    transitive_search, BlurKernel, EgsParams, GroupGrid, Image, Location, MatchMode, MatchParams, MatchResult,
    OptaParams, SearchOptions, SearchPlan, WindowStats,
};

// Regression levels measured on the fixed corpus below. Mean elimination is
// checked within 2% (relative); mean operation counts per threshold likewise.
const FROZEN_EGS_ELIM_PCT: f64 = 94.949;
const FROZEN_OPTA_ELIM_PCT: f64 = 95.216;
/// (initial threshold, egs ops, opta ops)
const FROZEN_THRESHOLD_OPS: [(f64, f64, f64); 4] =
    [(0.75, 11435.9, 10908.5), (0.80, 11204.3, 10718.2), (0.85, 10753.5, 10412.7), (0.90, 10100.9, 9955.7)];
const REGRESSION_TOL: f64 = 0.02;

const PLANTINGS: usize = 200;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_regression(measured: f64, frozen: f64) -> bool {
    (measured - frozen).abs() <= REGRESSION_TOL * frozen.abs()
}

// ---- independent oracles ----

fn window(img: &Image, loc: Location, m: usize, n: usize) -> Vec<f64> {
    (loc.row..loc.row + m).flat_map(|r| (loc.col..loc.col + n).map(move |c| img.get(r, c))).collect()
}

/// Two-pass correlation coefficient; 0 when either side is constant.
fn zncc_two_pass(a: &[f64], b: &[f64]) -> f64 {
    let k = a.len() as f64;
    let ma = a.iter().sum::<f64>() / k;
    let mb = b.iter().sum::<f64>() / k;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let scale_a = a.iter().map(|v| v * v).sum::<f64>().max(1.0);
    let scale_b = b.iter().map(|v| v * v).sum::<f64>().max(1.0);
    if saa <= 1e-12 * scale_a || sbb <= 1e-12 * scale_b {
        return 0.0;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

fn bounds_oracle(tc: f64, co: f64) -> (f64, f64) {
    let s = ((1.0 - tc * tc) * (1.0 - co * co)).max(0.0).sqrt();
    (tc * co - s, tc * co + s)
}

/// Exhaustive argmax with the positional tie-break.
fn surface_argmax(surface: &[f64], cols: usize) -> (Location, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in surface.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    (Location::new(best.0 / cols, best.0 % cols), best.1)
}

fn group_count(rows: usize, cols: usize, h: usize, w: usize) -> usize {
    rows.div_ceil(h) * cols.div_ceil(w)
}

fn is_center(loc: Location, rows: usize, cols: usize, h: usize, w: usize) -> bool {
    let center = |x: usize, len: usize, g: usize| {
        let start = x / g * g;
        let end = (start + g).min(len);
        start + (end - start - 1) / 2
    };
    loc.row == center(loc.row, rows, h) && loc.col == center(loc.col, cols, w)
}

// ---- shared corpus and runs ----

fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let spec = SynthSpec {
            width: 512,
            height: 512,
            images: 5,
            sigma: 3.0,
            template_sizes: vec![21, 41, 61],
            templates_per_size: 14,
            gain: 1.1,
            offset: -15.0,
            seed: 20240611,
            ..SynthSpec::default()
        };
        let mut c = generate(&spec).expect("corpus");
        c.plantings.truncate(PLANTINGS);
        c.templates.truncate(PLANTINGS);
        c
    })
}

struct Run {
    size: usize,
    truth: Location,
    brute: Location,
    egs: MatchResult,
    opta: MatchResult,
}

struct Runs {
    runs: Vec<Run>,
    secs: f64,
    egs_violations: usize,
    opta_violations: usize,
    rechecked: usize,
    eliminated_checked: usize,
    soundness_secs: f64,
}

fn runs() -> &'static Runs {
    static RUNS: OnceLock<Runs> = OnceLock::new();
    RUNS.get_or_init(|| {
        let c = corpus();
        let params = MatchParams::default();
        let options = SearchOptions { initial_threshold: None, record: true };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut out = Runs {
            runs: Vec::new(),
            secs: 0.0,
            egs_violations: 0,
            opta_violations: 0,
            rechecked: 0,
            eliminated_checked: 0,
            soundness_secs: 0.0,
        };
        for (i, img) in c.images.iter().enumerate() {
            for &size in &c.spec.template_sizes {
                let picks: Vec<usize> =
                    (0..c.plantings.len()).filter(|&k| c.plantings[k].image == i && c.plantings[k].size == size).collect();
                if picks.is_empty() {
                    continue;
                }
                let start = Instant::now();
                let egs_plan = SearchPlan::new(img, size, size, MatchMode::Egs, &params).unwrap();
                let opta_plan = SearchPlan::new(img, size, size, MatchMode::Opta, &params).unwrap();
                out.secs += start.elapsed().as_secs_f64();
                let cols = img.width() - size + 1;
                for k in picks {
                    let t = &c.templates[k];
                    let start = Instant::now();
                    let surface = correlation_surface(t, img).unwrap();
                    let (brute, _) = surface_argmax(&surface, cols);
                    let egs = egs_plan.search(t, &options).unwrap();
                    let opta = opta_plan.search(t, &options).unwrap();
                    out.secs += start.elapsed().as_secs_f64();

                    let start = Instant::now();
                    let blurred_surface = correlation_surface(t, opta_plan.searched_image()).unwrap();
                    for (res, surf, searched, count) in [
                        (&egs, &surface, img, &mut out.egs_violations),
                        (&opta, &blurred_surface, opta_plan.searched_image(), &mut out.opta_violations),
                    ] {
                        let rho_tb = res.final_threshold.expect("threshold");
                        out.eliminated_checked += res.eliminated.len();
                        *count += res.eliminated.iter().filter(|o| surf[o.row * cols + o.col] > rho_tb + 1e-9).count();
                        // The surface itself is checked against two-pass correlation.
                        for _ in 0..10.min(res.eliminated.len()) {
                            let o = res.eliminated[rng.random_range(0..res.eliminated.len())];
                            let direct = zncc_two_pass(&window(t, Location::new(0, 0), size, size), &window(searched, o, size, size));
                            if (direct - surf[o.row * cols + o.col]).abs() > 1e-9 || direct > rho_tb + 1e-9 {
                                *count += 1;
                            }
                            out.rechecked += 1;
                        }
                    }
                    out.soundness_secs += start.elapsed().as_secs_f64();
                    out.runs.push(Run { size, truth: c.plantings[k].location(), brute, egs, opta });
                }
            }
        }
        out
    })
}

// ---- criteria ----

fn c1_bound_validity() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = smoothed_noise(160, 160, 2.0, 0.0, 255.0, &mut rng);
    let b = smoothed_noise(160, 160, 2.0, 0.0, 255.0, &mut rng);
    let (mut checked, mut bad, mut worst) = (0, 0, 0.0f64);
    while checked < 10_000 {
        let m = [5, 9, 15][checked % 3];
        let hi = 160 - m;
        let tl = Location::new(rng.random_range(0..=hi), rng.random_range(0..=hi));
        let cl = Location::new(rng.random_range(0..=hi), rng.random_range(0..=hi));
        let ol = Location::new(
            (cl.row as i64 + rng.random_range(-3..=3)).clamp(0, hi as i64) as usize,
            (cl.col as i64 + rng.random_range(-3..=3)).clamp(0, hi as i64) as usize,
        );
        let src = if checked % 2 == 0 { &a } else { &b };
        let (t, rc, ro) = (window(&a, tl, m, m), window(src, cl, m, m), window(src, ol, m, m));
        let (tc, co, to) = (zncc_two_pass(&t, &rc), zncc_two_pass(&rc, &ro), zncc_two_pass(&t, &ro));
        let bp = transitive_bounds(tc, co).map_err(|e| e.to_string())?;
        let (lo, up) = bounds_oracle(tc, co);
        worst = worst.max((bp.lower - lo).abs()).max((bp.upper - up).abs());
        if to < bp.lower - 1e-9 || to > bp.upper + 1e-9 {
            bad += 1;
        }
        checked += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        bad == 0 && worst < 1e-12 && secs < 10.0,
        format!("{checked} triples, {bad} outside bounds, formula deviation {worst:.1e}, {secs:.2}s"),
    )
}

fn c2_figure_algebra() -> Check {
    let bp = transitive_bounds(0.61, 0.81).map_err(|e| e.to_string())?;
    let (lo, up) = bounds_oracle(0.61, 0.81);
    ensure(
        (bp.lower - 0.0294).abs() <= 1e-4
            && (bp.upper - 0.9588).abs() <= 1e-4
            && (bp.lower - lo).abs() < 1e-15
            && (bp.upper - up).abs() < 1e-15,
        format!("bounds(0.61, 0.81) = ({:.6}, {:.6})", bp.lower, bp.upper),
    )
}

fn c3_exhaustive_accuracy() -> Check {
    let r = runs();
    let n = r.runs.len();
    let planted_ok = r.runs.iter().filter(|x| x.brute == x.truth).count();
    let egs_ok = r.runs.iter().filter(|x| x.egs.best.loc == x.brute).count();
    let opta_ok = r.runs.iter().filter(|x| x.opta.refined.loc == x.brute).count();
    let max_disp = r
        .runs
        .iter()
        .map(|x| x.opta.best.loc.row.abs_diff(x.truth.row).max(x.opta.best.loc.col.abs_diff(x.truth.col)))
        .max()
        .unwrap_or(0);
    let per_size: Vec<String> = corpus()
        .spec
        .template_sizes
        .iter()
        .map(|&s| format!("{s}:{}", r.runs.iter().filter(|x| x.size == s).count()))
        .collect();
    ensure(
        n == PLANTINGS && planted_ok == n && egs_ok == n && opta_ok == n && max_disp <= 4 && r.secs < 300.0,
        format!(
            "{n} plantings ({}), brute at truth {planted_ok}/{n}, egs {egs_ok}/{n}, opta refined {opta_ok}/{n}, \
             max pre-refinement displacement {max_disp}px, {:.1}s",
            per_size.join(" "),
            r.secs
        ),
    )
}

fn c4_elimination_soundness() -> Check {
    let r = runs();
    ensure(
        r.egs_violations == 0 && r.opta_violations == 0 && r.eliminated_checked > 0,
        format!(
            "{} eliminated members checked against exhaustive surfaces ({} against two-pass correlation), \
             violations egs {} opta {}, {:.1}s",
            r.eliminated_checked, r.rechecked, r.egs_violations, r.opta_violations, r.soundness_secs
        ),
    )
}

fn c5_elimination_magnitude() -> Check {
    let r = runs();
    let n = r.runs.len() as f64;
    let egs = r.runs.iter().map(|x| x.egs.stats.elimination_pct()).sum::<f64>() / n;
    let opta = r.runs.iter().map(|x| x.opta.stats.elimination_pct()).sum::<f64>() / n;
    ensure(
        egs >= 80.0
            && opta >= egs
            && within_regression(egs, FROZEN_EGS_ELIM_PCT)
            && within_regression(opta, FROZEN_OPTA_ELIM_PCT),
        format!(
            "mean elimination egs {egs:.3}% (frozen {FROZEN_EGS_ELIM_PCT:.3}), opta {opta:.3}% (frozen {FROZEN_OPTA_ELIM_PCT:.3})"
        ),
    )
}

fn c6_cost_model() -> Check {
    let c = corpus();
    let cut = (1.0f64 - 0.8 * 0.8).sqrt();
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for img in c.images.iter().take(3) {
        for &m in &[21usize, 41] {
            let (rows, cols) = img.extent(m, m).unwrap();
            for h in [3usize, 5, 7, 9] {
                let grid = GroupGrid::new(rows, cols, h, h).unwrap();
                let map = local_autocorrelation(img, m, m, &grid).unwrap();
                let mut direct = 0;
                for r in 0..rows {
                    for col in 0..cols {
                        let loc = Location::new(r, col);
                        if !is_center(loc, rows, cols, h, h) && map.get(loc) < cut {
                            direct += 1;
                        }
                    }
                }
                let n_r = retained_count(&map, 0.8).unwrap();
                let est = total_cost(rows, cols, h, h, n_r, None).unwrap();
                let groups = group_count(rows, cols, h, h);
                if n_r != direct || est.central != groups as f64 || grid.group_count() != groups {
                    mismatches.push(format!("m={m} h={h}: n_r {n_r} vs {direct}, c_c {} vs {groups}", est.central));
                }
                cases += 1;
            }
            let egs = efficient_group_size(img, m, m, &EgsParams::default()).unwrap();
            let egs_grid = egs.grid();
            let scan = (0..rows * cols)
                .map(|k| Location::new(k / cols, k % cols))
                .filter(|&o| !egs_grid.is_center(o) && egs.autocorr.get(o) < cut)
                .count();
            if egs.cost.retained != scan || egs.cost.central != group_count(rows, cols, egs.h_e, egs.w_e) as f64 {
                mismatches.push(format!("egs m={m}: estimate disagrees with direct scan"));
            }
            cases += 1;
        }
    }
    ensure(mismatches.is_empty(), format!("{cases} maps, mismatches: {mismatches:?}"))
}

fn c7_egs_stopping() -> Check {
    let spec = SynthSpec {
        width: 256,
        height: 256,
        images: 20,
        sigma: 3.0,
        template_sizes: vec![21],
        templates_per_size: 0,
        seed: 77,
        ..SynthSpec::default()
    };
    let c = generate(&spec).map_err(|e| e.to_string())?;
    let xi = 0.005;
    let (mut accepted, mut stops, mut bad) = (0, 0, Vec::new());
    for (i, img) in c.images.iter().enumerate() {
        let m = [15, 21, 31][i % 3];
        let res = efficient_group_size(img, m, m, &EgsParams { xi_fraction: xi, ..EgsParams::default() }).unwrap();
        let mut prev: Option<f64> = None;
        for step in &res.trace {
            match (prev, step.accepted) {
                (None, _) => prev = Some(step.cost.total),
                (Some(p), true) => {
                    accepted += 1;
                    if !(p - step.cost.total > xi * p) {
                        bad.push(format!("image {i}: accepted {}x{} improved only {}", step.h, step.w, p - step.cost.total));
                    }
                    prev = Some(step.cost.total);
                }
                (Some(p), false) => {
                    stops += 1;
                    if p - step.cost.total > xi * p {
                        bad.push(format!("image {i}: rejected {}x{} despite improvement", step.h, step.w));
                    }
                }
            }
        }
        let last_accepted = res.trace.iter().rev().find(|s| s.accepted).unwrap();
        if (last_accepted.h, last_accepted.w) != (res.h_e, res.w_e) {
            bad.push(format!("image {i}: result is not the last accepted size"));
        }
    }
    ensure(
        bad.is_empty() && accepted > 0,
        format!("20 images, {accepted} accepted growth steps, {stops} rejections, problems: {bad:?}"),
    )
}

fn c8_opta_fidelity() -> Check {
    let c = corpus();
    let lambda = quality_threshold(0.8, 0.95).map_err(|e| e.to_string())?;
    let oracle = 0.8 * 0.95 + (1.0f64 + 0.64 * 0.9025 - 0.64 - 0.9025).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut blurred_locs, mut bad, mut spot_bad, mut passes) = (0usize, 0usize, 0usize, Vec::new());
    for img in c.images.iter().take(3) {
        for &m in &c.spec.template_sizes {
            let res = optimize_autocorrelation(img, m, m, &OptaParams::default()).unwrap();
            passes.push(res.blur_passes);
            let fid = blur_fidelity_map(img, &res.blurred, m, m).unwrap();
            // Naive prefix count of changed pixels.
            let (w, h) = (img.width(), img.height());
            let mut pre = vec![0usize; (w + 1) * (h + 1)];
            for r in 0..h {
                for col in 0..w {
                    let d = (img.get(r, col) != res.blurred.get(r, col)) as usize;
                    pre[(r + 1) * (w + 1) + col + 1] = d + pre[r * (w + 1) + col + 1] + pre[(r + 1) * (w + 1) + col] - pre[r * (w + 1) + col];
                }
            }
            let (rows, cols) = fid.extent();
            for r in 0..rows {
                for col in 0..cols {
                    let changed = pre[(r + m) * (w + 1) + col + m] + pre[r * (w + 1) + col]
                        - pre[r * (w + 1) + col + m]
                        - pre[(r + m) * (w + 1) + col];
                    if changed > 0 {
                        blurred_locs += 1;
                        if fid.get(Location::new(r, col)) < lambda {
                            bad += 1;
                        }
                    }
                }
            }
            for _ in 0..20 {
                let loc = Location::new(rng.random_range(0..rows), rng.random_range(0..cols));
                let direct = zncc_two_pass(&window(img, loc, m, m), &window(&res.blurred, loc, m, m));
                if (direct - fid.get(loc)).abs() > 1e-9 {
                    spot_bad += 1;
                }
            }
        }
    }
    ensure(
        (lambda - 0.9473).abs() <= 1e-4 && (lambda - oracle).abs() <= 1e-6 && bad == 0 && spot_bad == 0 && blurred_locs > 0,
        format!(
            "lambda {lambda:.6}, {blurred_locs} blurred locations scanned, {bad} below lambda, \
             {spot_bad} fidelity spot-check mismatches, blur passes {passes:?}"
        ),
    )
}

fn c9_degenerate_equivalences() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut unit_bad = 0;
    let mut cases = 0;
    for k in 0..12 {
        let img = smoothed_noise(96, 80, [0.0, 1.5, 3.0][k % 3], 0.0, 255.0, &mut rng);
        let m = [7, 11, 15][k % 3];
        let t = if k % 2 == 0 {
            img.crop(Location::new(rng.random_range(0..=80 - m), rng.random_range(0..=96 - m)), m, m).unwrap()
        } else {
            smoothed_noise(m, m, 1.0, 0.0, 255.0, &mut rng)
        };
        let (rows, cols) = img.extent(m, m).unwrap();
        let grid = GroupGrid::new(rows, cols, 1, 1).unwrap();
        let map = local_autocorrelation(&img, m, m, &grid).unwrap();
        let fast = transitive_search(&t, &img, &map, &grid, &SearchOptions::default()).unwrap();
        let brute = brute_force_match(&t, &img).unwrap();
        if fast.best.loc != brute.best.loc || fast.best.rho.to_bits() != brute.best.rho.to_bits() {
            unit_bad += 1;
        }
        cases += 1;
    }
    let mut delta_bad = 0;
    for img in corpus().images.iter().take(2) {
        for &m in &[21usize, 41] {
            let egs = efficient_group_size(img, m, m, &EgsParams::default()).unwrap();
            let params = OptaParams { kernel: BlurKernel::delta(), ..OptaParams::default() };
            let opta = optimize_autocorrelation(img, m, m, &params).unwrap();
            let same = opta.trace[0].egs_trace == egs.trace
                && opta.trace.iter().skip(1).all(|it| !it.accepted)
                && (opta.h_e, opta.w_e) == (egs.h_e, egs.w_e)
                && opta.cost == egs.cost
                && opta.blurred == *img;
            if !same {
                delta_bad += 1;
            }
        }
    }
    ensure(
        unit_bad == 0 && delta_bad == 0,
        format!("h=w=1 vs brute force: {unit_bad}/{cases} differ; delta-kernel vs group size selection: {delta_bad}/4 differ"),
    )
}

fn c10_running_sums() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut sum_bad, mut sigma_bad) = (0, 0);
    for case in 0..1000 {
        let (w, h) = (rng.random_range(1..=24), rng.random_range(1..=24));
        let data: Vec<f64> = (0..w * h)
            .map(|_| if case % 2 == 0 { rng.random_range(0..256) as f64 } else { rng.random_range(-1e3..1e3) })
            .collect();
        let img = Image::new(w, h, data).unwrap();
        let (m, n) = (rng.random_range(1..=h), rng.random_range(1..=w));
        let table = running_sum(&img, m, n).unwrap();
        let stats = WindowStats::new(&img, m, n).unwrap();
        for r in 0..=h - m {
            for c in 0..=w - n {
                let win = window(&img, Location::new(r, c), m, n);
                let naive: f64 = win.iter().sum();
                let scale = win.iter().map(|v| v.abs()).sum::<f64>().max(1e-300);
                if (table.get(r, c) - naive).abs() > 1e-9 * scale {
                    sum_bad += 1;
                }
                let mean = naive / win.len() as f64;
                let omega = win.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>().sqrt();
                let got = stats.sigma(r, c);
                let flat_ok = omega <= 1e-6 * scale && got == 0.0;
                if !flat_ok && (got - omega).abs() > 1e-6 * omega.max(1e-12) {
                    sigma_bad += 1;
                }
            }
        }
    }
    ensure(sum_bad == 0 && sigma_bad == 0, format!("1000 cases, sum mismatches {sum_bad}, sigma mismatches {sigma_bad}"))
}

fn c11_threshold_insensitivity() -> Check {
    let c = corpus();
    let params = MatchParams::default();
    let thresholds: Vec<f64> = FROZEN_THRESHOLD_OPS.iter().map(|&(t, _, _)| t).collect();
    let mut egs_ops = vec![0usize; thresholds.len()];
    let mut opta_ops = vec![0usize; thresholds.len()];
    // The sensitivity claim is about the blurred search; the plain group size
    // search is reported alongside. The design threshold is swept too,
    // reported only: it changes the group size itself.
    let mut design_ops = vec![0usize; thresholds.len()];
    for (i, img) in c.images.iter().enumerate() {
        for &size in &c.spec.template_sizes {
            let picks: Vec<usize> =
                (0..c.plantings.len()).filter(|&k| c.plantings[k].image == i && c.plantings[k].size == size).collect();
            if picks.is_empty() {
                continue;
            }
            let egs = SearchPlan::new(img, size, size, MatchMode::Egs, &params).unwrap();
            let opta = SearchPlan::new(img, size, size, MatchMode::Opta, &params).unwrap();
            for (j, &tau) in thresholds.iter().enumerate() {
                let options = SearchOptions { initial_threshold: Some(tau), record: false };
                let mut design = params.clone();
                design.egs.rho_tb = tau;
                let redesigned = SearchPlan::new(img, size, size, MatchMode::Egs, &design).unwrap();
                for &k in &picks {
                    let t = &c.templates[k];
                    egs_ops[j] += egs.search(t, &options).unwrap().stats.operations();
                    opta_ops[j] += opta.search(t, &options).unwrap().stats.operations();
                    design_ops[j] += redesigned.search(t, &SearchOptions::default()).unwrap().stats.operations();
                }
            }
        }
    }
    let n = c.plantings.len() as f64;
    let mean = |v: &[usize]| v.iter().map(|&x| x as f64 / n).collect::<Vec<f64>>();
    let spread = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / lo
    };
    let (egs, opta, design) = (mean(&egs_ops), mean(&opta_ops), mean(&design_ops));
    let frozen_ok = FROZEN_THRESHOLD_OPS
        .iter()
        .zip(egs.iter().zip(&opta))
        .all(|(&(_, fe, fo), (&e, &o))| within_regression(e, fe) && within_regression(o, fo));
    let show = |v: &[f64]| thresholds.iter().zip(v).map(|(t, m)| format!("{t:.2}:{m:.1}")).collect::<Vec<_>>().join(" ");
    ensure(
        spread(&opta) < 0.10 && frozen_ok,
        format!(
            "mean ops per template over initial thresholds: opta {} (spread {:.2}%); \
             reported only: egs {} (spread {:.2}%), design threshold sweep egs {} (spread {:.2}%)",
            show(&opta),
            spread(&opta) * 100.0,
            show(&egs),
            spread(&egs) * 100.0,
            show(&design),
            spread(&design) * 100.0
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("1 transitive bound validity", c1_bound_validity),
        ("2 bound algebra example", c2_figure_algebra),
        ("3 exhaustive accuracy", c3_exhaustive_accuracy),
        ("4 elimination soundness", c4_elimination_soundness),
        ("5 elimination magnitude", c5_elimination_magnitude),
        ("6 cost model exactness", c6_cost_model),
        ("7 group size stopping discipline", c7_egs_stopping),
        ("8 blur fidelity invariant", c8_opta_fidelity),
        ("9 degenerate equivalences", c9_degenerate_equivalences),
        ("10 running sum oracle", c10_running_sums),
        ("11 threshold insensitivity", c11_threshold_insensitivity),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
