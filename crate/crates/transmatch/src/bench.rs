//! Benchmark sweeps over template sizes and search modes.
//!
//! Accuracy is always judged against the stored planting position, never
//! against another mode.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use transmatch_core::{MatchMode, MatchResult, SearchOptions, SearchPlan};

use crate::config::Tuning;
use crate::io::load_image;
use crate::parallel::par_search;
use crate::synth::{plant, read_corpus, Corpus, Planting, SynthSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Corpus directory with a manifest; takes precedence over `images`.
    pub corpus: Option<PathBuf>,
    /// Search images to cut templates from when no corpus is given.
    pub images: Vec<PathBuf>,
    pub sizes: Vec<usize>,
    /// Templates cut per image and size when reading plain images.
    pub templates_per_size: usize,
    pub modes: Vec<MatchMode>,
    pub tuning: Tuning,
    /// Localization tolerance in pixels along each axis.
    pub tolerance: usize,
    pub seed: u64,
    /// Process images in parallel.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            images: Vec::new(),
            sizes: vec![21, 41, 61],
            templates_per_size: 4,
            modes: vec![MatchMode::Brute, MatchMode::Egs, MatchMode::Opta],
            tuning: Tuning::default(),
            tolerance: 4,
            seed: 0,
            parallel: false,
        }
    }
}

/// One template search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub image: usize,
    pub size: usize,
    pub mode: MatchMode,
    pub truth_row: usize,
    pub truth_col: usize,
    pub found_row: usize,
    pub found_col: usize,
    pub rho: f64,
    pub hit: bool,
    pub centers: usize,
    pub eliminated: usize,
    pub retained: usize,
    pub elim_pct: f64,
    pub ops: usize,
    pub group_h: usize,
    pub group_w: usize,
    pub kappa: Option<usize>,
    /// Search time plus this template's share of the per-image setup.
    pub time_ms: f64,
}

/// Averages over all runs of one (size, mode) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub size: usize,
    pub mode: MatchMode,
    pub time_ms: f64,
    pub elim_pct: f64,
    pub accuracy_pct: f64,
    pub ops: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
    pub runs: Vec<BenchRun>,
}

impl BenchConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.sizes.is_empty() {
            bail!("template size list is empty");
        }
        if self.modes.is_empty() {
            bail!("mode list is empty");
        }
        if self.corpus.is_none() && self.images.is_empty() {
            bail!("no corpus or search images given");
        }
        Ok(())
    }

    /// Loads the corpus, or cuts templates from the listed images with the
    /// configured seed.
    pub fn load_workload(&self) -> anyhow::Result<Corpus> {
        self.validate()?;
        let mut corpus = if let Some(dir) = &self.corpus {
            read_corpus(dir).with_context(|| format!("corpus {} missing or unreadable", dir.display()))?
        } else {
            let images = self.images.iter().map(load_image).collect::<Result<Vec<_>, _>>()?;
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let mut plantings = Vec::new();
            for (i, img) in images.iter().enumerate() {
                for &size in &self.sizes {
                    if size == 0 || size > img.width().min(img.height()) {
                        bail!("template size {size} does not fit image {i}");
                    }
                    for _ in 0..self.templates_per_size {
                        plantings.push(Planting {
                            image: i,
                            size,
                            row: rng.random_range(0..=img.height() - size),
                            col: rng.random_range(0..=img.width() - size),
                            gain: 1.0,
                            offset: 0.0,
                        });
                    }
                }
            }
            let templates = plantings.iter().map(|p| plant(&images[p.image], p)).collect::<anyhow::Result<_>>()?;
            Corpus { spec: SynthSpec::default(), images, plantings, templates }
        };
        let keep: Vec<bool> = corpus.plantings.iter().map(|p| self.sizes.contains(&p.size)).collect();
        let mut k = keep.iter();
        corpus.plantings.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        corpus.templates.retain(|_| *k.next().unwrap());
        if corpus.plantings.is_empty() {
            bail!("corpus has no templates of the requested sizes");
        }
        let smallest = corpus.images.iter().map(|i| i.width().min(i.height())).min().unwrap_or(0);
        if let Some(s) = self.sizes.iter().find(|&&s| s > smallest) {
            bail!("template size {s} does not fit the smallest search image");
        }
        Ok(corpus)
    }
}

fn run_image(corpus: &Corpus, image: usize, size: usize, mode: MatchMode, config: &BenchConfig) -> anyhow::Result<Vec<BenchRun>> {
    let picks: Vec<usize> = (0..corpus.plantings.len())
        .filter(|&k| corpus.plantings[k].image == image && corpus.plantings[k].size == size)
        .collect();
    if picks.is_empty() {
        return Ok(Vec::new());
    }
    let params = config.tuning.match_params(None)?;
    let start = Instant::now();
    let plan = SearchPlan::new(&corpus.images[image], size, size, mode, &params)?;
    let setup_ms = start.elapsed().as_secs_f64() * 1e3 / picks.len() as f64;
    let options = SearchOptions::default();
    let tol = config.tolerance;
    picks
        .into_iter()
        .map(|k| {
            let p = &corpus.plantings[k];
            let t = Instant::now();
            let res: MatchResult = if config.parallel {
                par_search(&plan, &corpus.templates[k], &options)?
            } else {
                plan.search(&corpus.templates[k], &options)?
            };
            let ms = t.elapsed().as_secs_f64() * 1e3;
            let found = res.refined.loc;
            Ok(BenchRun {
                image,
                size,
                mode,
                truth_row: p.row,
                truth_col: p.col,
                found_row: found.row,
                found_col: found.col,
                rho: res.refined.rho,
                hit: found.row.abs_diff(p.row) <= tol && found.col.abs_diff(p.col) <= tol,
                centers: res.stats.centers,
                eliminated: res.stats.eliminated,
                retained: res.stats.retained,
                elim_pct: res.stats.elimination_pct(),
                ops: res.stats.operations(),
                group_h: res.group_size.0,
                group_w: res.group_size.1,
                kappa: res.kappa,
                time_ms: ms + setup_ms,
            })
        })
        .collect()
}

pub fn summarize(runs: &[BenchRun], sizes: &[usize], modes: &[MatchMode]) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for &size in sizes {
        for &mode in modes {
            let sel: Vec<&BenchRun> = runs.iter().filter(|r| r.size == size && r.mode == mode).collect();
            if sel.is_empty() {
                continue;
            }
            let n = sel.len() as f64;
            let mean = |f: &dyn Fn(&BenchRun) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / n;
            rows.push(BenchRow {
                size,
                mode,
                time_ms: mean(&|r| r.time_ms),
                elim_pct: mean(&|r| r.elim_pct),
                accuracy_pct: mean(&|r| if r.hit { 100.0 } else { 0.0 }),
                ops: mean(&|r| r.ops as f64),
            });
        }
    }
    rows
}

pub fn run_bench(corpus: &Corpus, config: &BenchConfig) -> anyhow::Result<BenchReport> {
    let mut jobs = Vec::new();
    for &size in &config.sizes {
        for &mode in &config.modes {
            for image in 0..corpus.images.len() {
                jobs.push((image, size, mode));
            }
        }
    }
    let batches: Vec<Vec<BenchRun>> = if config.parallel {
        jobs.par_iter().map(|&(i, s, m)| run_image(corpus, i, s, m, config)).collect::<anyhow::Result<_>>()?
    } else {
        jobs.iter().map(|&(i, s, m)| run_image(corpus, i, s, m, config)).collect::<anyhow::Result<_>>()?
    };
    let runs: Vec<BenchRun> = batches.into_iter().flatten().collect();
    let rows = summarize(&runs, &config.sizes, &config.modes);
    Ok(BenchReport { config: config.clone(), rows, runs })
}

pub const CSV_HEADER: [&str; 6] = ["size", "mode", "time_ms", "elim_pct", "accuracy_pct", "ops"];

pub fn write_csv(rows: &[BenchRow], out: impl Write) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.size.to_string(),
            r.mode.as_str().to_string(),
            format!("{:.3}", r.time_ms),
            format!("{:.4}", r.elim_pct),
            format!("{:.2}", r.accuracy_pct),
            format!("{:.1}", r.ops),
        ])?;
    }
    w.flush()?;
    Ok(())
}
