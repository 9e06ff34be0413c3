//! Synthetic search images and planted templates with known positions.
//!
//! Search images are white Gaussian noise smoothed with a Gaussian kernel;
//! `sigma` controls how auto-correlated neighbouring windows are. Templates
//! are cut at random positions and optionally given a gain and offset.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use transmatch_core::{blur, gaussian_kernel_with_radius, Image, Location};

use crate::io::{decode_image, encode_pgm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub images: usize,
    /// Standard deviation of the smoothing Gaussian, in pixels. 0 disables it.
    pub sigma: f64,
    pub template_sizes: Vec<usize>,
    pub templates_per_size: usize,
    pub gain: f64,
    pub offset: f64,
    /// Intensity range the smoothed noise is stretched to.
    pub low: f64,
    pub high: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
            images: 4,
            sigma: 3.0,
            template_sizes: vec![21, 41, 61],
            templates_per_size: 4,
            gain: 1.0,
            offset: 0.0,
            low: 40.0,
            high: 170.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.width == 0 || self.height == 0 || self.images == 0 {
            bail!("image size and count must be positive");
        }
        if self.template_sizes.is_empty() {
            bail!("template size list is empty");
        }
        if let Some(&s) = self.template_sizes.iter().find(|&&s| s == 0 || s > self.width.min(self.height)) {
            bail!("template size {s} does not fit a {}x{} image", self.height, self.width);
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) || self.gain <= 0.0 || !(self.low < self.high) {
            bail!("invalid sigma, gain or intensity range");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Planting {
    pub image: usize,
    pub size: usize,
    pub row: usize,
    pub col: usize,
    pub gain: f64,
    pub offset: f64,
}

impl Planting {
    pub fn location(&self) -> Location {
        Location::new(self.row, self.col)
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub spec: SynthSpec,
    pub images: Vec<Image>,
    pub plantings: Vec<Planting>,
    pub templates: Vec<Image>,
}

/// One smoothed-noise image with integer intensities.
pub fn smoothed_noise(width: usize, height: usize, sigma: f64, low: f64, high: f64, rng: &mut impl Rng) -> Image {
    let noise = Image::from_fn(width, height, |_, _| rng.sample::<f64, _>(StandardNormal)).expect("positive size");
    let smooth = if sigma > 0.0 {
        let kernel = gaussian_kernel_with_radius(sigma, (3.0 * sigma).ceil() as usize).expect("valid sigma");
        blur(&noise, &kernel)
    } else {
        noise
    };
    let lo = smooth.data().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = smooth.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = if hi > lo { (high - low) / (hi - lo) } else { 0.0 };
    smooth.map(|v| (low + (v - lo) * scale).round())
}

/// Cuts a template and applies the photometric change, rounding to 8 bits.
pub fn plant(img: &Image, p: &Planting) -> anyhow::Result<Image> {
    let t = img.crop(p.location(), p.size, p.size)?;
    Ok(t.map(|v| (p.gain * v + p.offset).round().clamp(0.0, 255.0)))
}

pub fn generate(spec: &SynthSpec) -> anyhow::Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut images = Vec::with_capacity(spec.images);
    let mut plantings = Vec::new();
    for i in 0..spec.images {
        let img = smoothed_noise(spec.width, spec.height, spec.sigma, spec.low, spec.high, &mut rng);
        for &size in &spec.template_sizes {
            for _ in 0..spec.templates_per_size {
                plantings.push(Planting {
                    image: i,
                    size,
                    row: rng.random_range(0..=spec.height - size),
                    col: rng.random_range(0..=spec.width - size),
                    gain: spec.gain,
                    offset: spec.offset,
                });
            }
        }
        images.push(img);
    }
    let templates = plantings.iter().map(|p| plant(&images[p.image], p)).collect::<anyhow::Result<_>>()?;
    Ok(Corpus { spec: spec.clone(), images, plantings, templates })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: SynthSpec,
    pub images: Vec<String>,
    pub templates: Vec<ManifestTemplate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestTemplate {
    pub file: String,
    #[serde(flatten)]
    pub planting: Planting,
}

pub const MANIFEST: &str = "manifest.json";

fn image_name(i: usize) -> String {
    format!("image_{i:03}.pgm")
}

fn template_name(k: usize, p: &Planting) -> String {
    format!("template_{k:04}_s{}.pgm", p.size)
}

/// Writes images, templates and `manifest.json` into `dir`.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut manifest = Manifest { spec: corpus.spec.clone(), images: Vec::new(), templates: Vec::new() };
    for (i, img) in corpus.images.iter().enumerate() {
        let name = image_name(i);
        fs::write(dir.join(&name), encode_pgm(img)).with_context(|| format!("cannot write {name}"))?;
        manifest.images.push(name);
    }
    for (k, (p, t)) in corpus.plantings.iter().zip(&corpus.templates).enumerate() {
        let name = template_name(k, p);
        fs::write(dir.join(&name), encode_pgm(t)).with_context(|| format!("cannot write {name}"))?;
        manifest.templates.push(ManifestTemplate { file: name, planting: p.clone() });
    }
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(dir.join(MANIFEST), json + "\n").context("cannot write manifest")?;
    Ok(())
}

pub fn read_corpus(dir: &Path) -> anyhow::Result<Corpus> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).with_context(|| format!("corpus manifest {} missing", path.display()))?;
    let manifest: Manifest = serde_json::from_str(&text).context("invalid corpus manifest")?;
    let load = |name: &str| -> anyhow::Result<Image> {
        let bytes = fs::read(dir.join(name)).with_context(|| format!("cannot read {name}"))?;
        decode_image(&bytes).with_context(|| format!("cannot decode {name}"))
    };
    let images = manifest.images.iter().map(|n| load(n)).collect::<anyhow::Result<Vec<_>>>()?;
    let mut plantings = Vec::new();
    let mut templates = Vec::new();
    for t in manifest.templates {
        if t.planting.image >= images.len() {
            bail!("{} refers to missing image {}", t.file, t.planting.image);
        }
        templates.push(load(&t.file)?);
        plantings.push(t.planting);
    }
    Ok(Corpus { spec: manifest.spec, images, plantings, templates })
}
