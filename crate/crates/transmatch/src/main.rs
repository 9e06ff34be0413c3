use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use transmatch::bench::{run_bench, write_csv, BenchConfig};
use transmatch::cache::AutoCorrCache;
use transmatch::config::{load_config, ConfigFile, KernelSpec, Tuning};
use transmatch::io::{load_image, save_image};
use transmatch::parallel::par_search;
use transmatch::report::{EgsReport, MatchReport, OptaSidecar};
use transmatch::synth::{generate, write_corpus, SynthSpec};
use transmatch_core::{efficient_group_size, optimize_autocorrelation, Image, MatchMode, SearchOptions, SearchPlan};

#[derive(Parser, Debug)]
#[command(name = "transmatch", version, about = "Exhaustive-accuracy template matching with transitive elimination")]
struct Cli {
    /// Random seed for synthesis and template extraction.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (file, or directory for `synth`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// TOML file of `key = value` defaults; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Brute,
    Egs,
    Opta,
}

impl From<ModeArg> for MatchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Brute => MatchMode::Brute,
            ModeArg::Egs => MatchMode::Egs,
            ModeArg::Opta => MatchMode::Opta,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic corpus of smoothed-noise images and planted templates.
    Synth(SynthArgs),
    /// Find a template in a search image.
    Match(MatchArgs),
    /// Select the efficient group size for an image and template size.
    Egs(AnalyzeArgs),
    /// Run controlled blurring and write the blurred image with a JSON sidecar.
    Opta(AnalyzeArgs),
    /// Time and score modes over a corpus.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Default)]
struct TuningArgs {
    #[arg(long)]
    rho_th: Option<f64>,
    #[arg(long)]
    rho_max: Option<f64>,
    /// Comma-separated 1-D blur profile.
    #[arg(long, value_delimiter = ',')]
    kernel: Option<Vec<f64>>,
    /// Gaussian blur sigma (instead of a profile).
    #[arg(long)]
    gaussian_sigma: Option<f64>,
    #[arg(long)]
    gaussian_radius: Option<usize>,
    #[arg(long)]
    xi_fraction: Option<f64>,
    #[arg(long)]
    stop_fraction: Option<f64>,
    #[arg(long)]
    initial_size: Option<usize>,
    /// Templates expected per image, to amortize auto-correlation cost.
    #[arg(long)]
    templates_per_image: Option<usize>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    images: Option<usize>,
    /// Smoothing Gaussian sigma in pixels.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    templates_per_size: Option<usize>,
    #[arg(long)]
    gain: Option<f64>,
    #[arg(long)]
    offset: Option<f64>,
}

#[derive(Args, Debug)]
struct MatchArgs {
    #[arg(short = 't', long)]
    template: PathBuf,
    #[arg(short = 'i', long)]
    image: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Initial threshold; results below it exit with code 2.
    #[arg(long)]
    threshold: Option<f64>,
    /// Process groups on all cores.
    #[arg(long)]
    parallel: bool,
    #[command(flatten)]
    tuning: TuningArgs,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(short = 'i', long)]
    image: PathBuf,
    /// Template size as HxW or a single number for square templates.
    #[arg(long, conflicts_with = "template")]
    size: Option<String>,
    /// Take the template size from this file.
    #[arg(short = 't', long)]
    template: Option<PathBuf>,
    /// Directory caching auto-correlation maps between runs.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[command(flatten)]
    tuning: TuningArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Corpus directory written by `synth`.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Search images to cut templates from instead of a corpus.
    #[arg(long, value_delimiter = ',')]
    images: Option<Vec<PathBuf>>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    templates_per_size: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',')]
    modes: Option<Vec<ModeArg>>,
    #[arg(long)]
    parallel: bool,
    #[command(flatten)]
    tuning: TuningArgs,
}

/// Exit code for results below the detection threshold.
const NO_DETECTION: u8 = 2;

fn tuning(args: &TuningArgs, cfg: &ConfigFile) -> anyhow::Result<Tuning> {
    let mut t = Tuning::default().with_config(cfg)?;
    t.rho_th = args.rho_th.unwrap_or(t.rho_th);
    t.rho_max = args.rho_max.unwrap_or(t.rho_max);
    t.xi_fraction = args.xi_fraction.unwrap_or(t.xi_fraction);
    t.stop_fraction = args.stop_fraction.unwrap_or(t.stop_fraction);
    t.initial_size = args.initial_size.unwrap_or(t.initial_size);
    t.templates_per_image = args.templates_per_image.or(t.templates_per_image);
    match (&args.kernel, args.gaussian_sigma) {
        (Some(_), Some(_)) => bail!("--kernel and --gaussian-sigma are mutually exclusive"),
        (Some(p), None) => t.kernel = KernelSpec::Profile(p.clone()),
        (None, Some(sigma)) => t.kernel = KernelSpec::Gaussian { sigma, radius: args.gaussian_radius, t: None },
        (None, None) => {}
    }
    Ok(t)
}

fn parse_size(s: &str) -> anyhow::Result<(usize, usize)> {
    let parse = |v: &str| v.trim().parse::<usize>().with_context(|| format!("invalid template size '{s}'"));
    match s.split_once(['x', 'X']) {
        Some((h, w)) => Ok((parse(h)?, parse(w)?)),
        None => parse(s).map(|v| (v, v)),
    }
}

struct Output {
    path: Option<PathBuf>,
    format: Format,
}

impl Output {
    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.path {
            Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
            None => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()?;
                Ok(())
            }
        }
    }
}

fn to_json(value: &impl serde::Serialize) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn cmd_synth(args: &SynthArgs, seed: Option<u64>, out: Option<PathBuf>, cfg: &ConfigFile) -> anyhow::Result<u8> {
    let d = SynthSpec::default();
    let spec = SynthSpec {
        width: args.width.or(cfg.width).unwrap_or(d.width),
        height: args.height.or(cfg.height).unwrap_or(d.height),
        images: args.images.or(cfg.images).unwrap_or(d.images),
        sigma: args.sigma.or(cfg.sigma).unwrap_or(d.sigma),
        template_sizes: args.sizes.clone().or(cfg.sizes.clone()).unwrap_or(d.template_sizes),
        templates_per_size: args.templates_per_size.or(cfg.templates_per_size).unwrap_or(d.templates_per_size),
        gain: args.gain.or(cfg.gain).unwrap_or(d.gain),
        offset: args.offset.or(cfg.offset).unwrap_or(d.offset),
        seed: seed.unwrap_or(d.seed),
        ..d
    };
    let dir = out.unwrap_or_else(|| PathBuf::from("corpus"));
    let corpus = generate(&spec)?;
    write_corpus(&corpus, &dir)?;
    eprintln!("wrote {} images and {} templates to {}", corpus.images.len(), corpus.templates.len(), dir.display());
    Ok(0)
}

fn cmd_match(args: &MatchArgs, output: &Output, cfg: &ConfigFile) -> anyhow::Result<u8> {
    let mode: MatchMode = match (args.mode, &cfg.mode) {
        (Some(m), _) => m.into(),
        (None, Some(m)) => m.parse().map_err(|_| anyhow::anyhow!("invalid mode '{m}' in config"))?,
        (None, None) => MatchMode::Egs,
    };
    let template = load_image(&args.template)?;
    let image = load_image(&args.image)?;
    let threshold = args.threshold.or(cfg.threshold);
    let params = tuning(&args.tuning, cfg)?.match_params(threshold)?;
    let start = Instant::now();
    let plan = SearchPlan::new(&image, template.height(), template.width(), mode, &params)?;
    let options = SearchOptions { initial_threshold: threshold, record: false };
    let mut result = if args.parallel || cfg.parallel.unwrap_or(false) {
        par_search(&plan, &template, &options)?
    } else {
        plan.search(&template, &options)?
    };
    result.stats.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    let report = MatchReport::from(&result);
    let text = match output.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(MatchReport::CSV_HEADER)?;
            w.write_record(report.csv_record())?;
            String::from_utf8(w.into_inner()?)?
        }
    };
    output.emit(&text)?;
    Ok(if report.detected { 0 } else { NO_DETECTION })
}

fn analyze_inputs(args: &AnalyzeArgs) -> anyhow::Result<(Image, usize, usize)> {
    let image = load_image(&args.image)?;
    let (m, n) = match (&args.size, &args.template) {
        (Some(s), _) => parse_size(s)?,
        (None, Some(t)) => {
            let t = load_image(t)?;
            (t.height(), t.width())
        }
        (None, None) => bail!("either --size or --template is required"),
    };
    Ok((image, m, n))
}

fn cmd_egs(args: &AnalyzeArgs, output: &Output, cfg: &ConfigFile) -> anyhow::Result<u8> {
    let (image, m, n) = analyze_inputs(args)?;
    let params = tuning(&args.tuning, cfg)?.match_params(None)?;
    let result = efficient_group_size(&image, m, n, &params.egs)?;
    if let Some(dir) = args.cache_dir.as_ref().or(cfg.cache_dir.as_ref()) {
        let cache = AutoCorrCache::new(dir);
        let key = transmatch::cache::cache_key(&image, m, n, result.h_e, result.w_e);
        cache.store(&key, &result.autocorr)?;
    }
    let report = EgsReport::from(&result);
    let text = match output.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["h", "w", "cost"])?;
            for s in &report.trace {
                w.write_record([s.h.to_string(), s.w.to_string(), s.cost.to_string()])?;
            }
            String::from_utf8(w.into_inner()?)?
        }
    };
    output.emit(&text)?;
    Ok(0)
}

fn sidecar_path(image_path: &Path) -> PathBuf {
    let mut name = image_path.file_name().unwrap_or_default().to_os_string();
    name.push(".json");
    image_path.with_file_name(name)
}

fn cmd_opta(args: &AnalyzeArgs, out: Option<PathBuf>, cfg: &ConfigFile) -> anyhow::Result<u8> {
    let (image, m, n) = analyze_inputs(args)?;
    let params = tuning(&args.tuning, cfg)?.match_params(None)?;
    let result = optimize_autocorrelation(&image, m, n, &params.opta)?;
    let image_out = out.unwrap_or_else(|| PathBuf::from("blurred.pgm"));
    save_image(&result.blurred, &image_out)?;
    if let Some(dir) = args.cache_dir.as_ref().or(cfg.cache_dir.as_ref()) {
        let cache = AutoCorrCache::new(dir);
        let key = transmatch::cache::cache_key(&result.blurred, m, n, result.h_e, result.w_e);
        cache.store(&key, &result.autocorr)?;
    }
    let json = to_json(&OptaSidecar::from(&result))?;
    let side = sidecar_path(&image_out);
    fs::write(&side, &json).with_context(|| format!("cannot write {}", side.display()))?;
    io::stdout().write_all(json.as_bytes())?;
    Ok(0)
}

fn cmd_bench(args: &BenchArgs, seed: Option<u64>, output: &Output, cfg: &ConfigFile) -> anyhow::Result<u8> {
    let d = BenchConfig::default();
    let modes = match (&args.modes, &cfg.modes) {
        (Some(m), _) => m.iter().map(|&m| m.into()).collect(),
        (None, Some(m)) => m
            .iter()
            .map(|s| s.parse().map_err(|_| anyhow::anyhow!("invalid mode '{s}' in config")))
            .collect::<anyhow::Result<_>>()?,
        (None, None) => d.modes,
    };
    let config = BenchConfig {
        corpus: args.corpus.clone().or(cfg.corpus.clone()),
        images: args.images.clone().or(cfg.image_paths.clone()).unwrap_or_default(),
        sizes: args.sizes.clone().or(cfg.sizes.clone()).unwrap_or(d.sizes),
        templates_per_size: args.templates_per_size.or(cfg.templates_per_size).unwrap_or(d.templates_per_size),
        modes,
        tuning: tuning(&args.tuning, cfg)?,
        seed: seed.unwrap_or(d.seed),
        parallel: args.parallel || cfg.parallel.unwrap_or(false),
        ..d
    };
    let corpus = config.load_workload()?;
    let report = run_bench(&corpus, &config)?;
    let mut csv_buf = Vec::new();
    write_csv(&report.rows, &mut csv_buf)?;
    let json = to_json(&report)?;
    match &output.path {
        Some(p) => {
            // Both reports are always written; the extension picks the names.
            fs::write(p.with_extension("csv"), &csv_buf).context("cannot write CSV report")?;
            fs::write(p.with_extension("json"), &json).context("cannot write JSON report")?;
        }
        None => match output.format {
            Format::Csv => output.emit(std::str::from_utf8(&csv_buf)?)?,
            Format::Json => output.emit(&json)?,
        },
    }
    Ok(0)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => ConfigFile::default(),
    };
    let seed = cli.seed.or(cfg.seed);
    let out = cli.out.clone().or(cfg.out.clone());
    let format = match (cli.format, cfg.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some(s)) => Format::from_str(s, true).map_err(|_| anyhow::anyhow!("invalid format '{s}' in config"))?,
        (None, None) if matches!(cli.command, Command::Bench(_)) => Format::Csv,
        (None, None) => Format::Json,
    };
    let output = Output { path: out.clone(), format };
    match &cli.command {
        Command::Synth(a) => cmd_synth(a, seed, out, &cfg),
        Command::Match(a) => cmd_match(a, &output, &cfg),
        Command::Egs(a) => cmd_egs(a, &output, &cfg),
        Command::Opta(a) => cmd_opta(a, out, &cfg),
        Command::Bench(a) => cmd_bench(a, seed, &output, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
