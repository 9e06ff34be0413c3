//! Settings shared by the CLI and the benchmark, and the `--config` file.
//!
//! The config file is flat TOML (`key = value`). Every key is optional and
//! command-line flags take precedence over it.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use transmatch_core::{gaussian_kernel, gaussian_kernel_with_radius, BlurKernel, EgsParams, MatchParams, OptaParams};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub mode: Option<String>,
    pub rho_th: Option<f64>,
    pub rho_max: Option<f64>,
    pub kernel: Option<Vec<f64>>,
    pub gaussian_sigma: Option<f64>,
    pub gaussian_radius: Option<usize>,
    pub gaussian_t: Option<f64>,
    pub xi_fraction: Option<f64>,
    pub stop_fraction: Option<f64>,
    pub initial_size: Option<usize>,
    pub templates_per_image: Option<usize>,
    pub threshold: Option<f64>,
    pub parallel: Option<bool>,
    pub cache_dir: Option<PathBuf>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub images: Option<usize>,
    pub sigma: Option<f64>,
    pub sizes: Option<Vec<usize>>,
    pub templates_per_size: Option<usize>,
    pub gain: Option<f64>,
    pub offset: Option<f64>,
    pub corpus: Option<PathBuf>,
    pub image_paths: Option<Vec<PathBuf>>,
    pub modes: Option<Vec<String>>,
}

pub fn load_config(path: &Path) -> anyhow::Result<ConfigFile> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

/// How the blur kernel is specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    /// 1-D profile applied along rows and columns.
    Profile(Vec<f64>),
    /// Gaussian with either an explicit radius or a truncation level `t`.
    Gaussian { sigma: f64, radius: Option<usize>, t: Option<f64> },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Profile(transmatch_core::blur::DEFAULT_PROFILE.to_vec())
    }
}

impl KernelSpec {
    pub fn build(&self) -> anyhow::Result<BlurKernel> {
        Ok(match self {
            KernelSpec::Profile(p) => BlurKernel::separable(p)?,
            KernelSpec::Gaussian { sigma, radius: Some(d), .. } => gaussian_kernel_with_radius(*sigma, *d)?,
            KernelSpec::Gaussian { sigma, radius: None, t } => gaussian_kernel(*sigma, t.unwrap_or(0.01))?,
        })
    }
}

/// Parameters of group size selection and controlled blurring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub rho_th: f64,
    pub rho_max: f64,
    pub kernel: KernelSpec,
    pub xi_fraction: f64,
    pub stop_fraction: f64,
    pub initial_size: usize,
    pub templates_per_image: Option<usize>,
}

impl Default for Tuning {
    fn default() -> Self {
        let o = OptaParams::default();
        Self {
            rho_th: o.rho_th,
            rho_max: o.rho_max,
            kernel: KernelSpec::default(),
            xi_fraction: o.xi_fraction,
            stop_fraction: o.stop_fraction,
            initial_size: o.initial_size,
            templates_per_image: None,
        }
    }
}

impl Tuning {
    /// Overlays the values set in a config file.
    pub fn with_config(mut self, cfg: &ConfigFile) -> anyhow::Result<Self> {
        if let Some(v) = cfg.rho_th {
            self.rho_th = v;
        }
        if let Some(v) = cfg.rho_max {
            self.rho_max = v;
        }
        if let Some(v) = cfg.xi_fraction {
            self.xi_fraction = v;
        }
        if let Some(v) = cfg.stop_fraction {
            self.stop_fraction = v;
        }
        if let Some(v) = cfg.initial_size {
            self.initial_size = v;
        }
        if cfg.templates_per_image.is_some() {
            self.templates_per_image = cfg.templates_per_image;
        }
        match (&cfg.kernel, cfg.gaussian_sigma) {
            (Some(_), Some(_)) => bail!("config sets both kernel and gaussian_sigma"),
            (Some(p), None) => self.kernel = KernelSpec::Profile(p.clone()),
            (None, Some(sigma)) => {
                self.kernel = KernelSpec::Gaussian { sigma, radius: cfg.gaussian_radius, t: cfg.gaussian_t }
            }
            (None, None) => {}
        }
        Ok(self)
    }

    pub fn match_params(&self, initial_threshold: Option<f64>) -> anyhow::Result<MatchParams> {
        Ok(MatchParams {
            egs: EgsParams {
                initial_size: self.initial_size,
                rho_tb: self.rho_th,
                xi_fraction: self.xi_fraction,
                templates_per_image: self.templates_per_image,
                max_size: None,
            },
            opta: OptaParams {
                rho_th: self.rho_th,
                rho_max: self.rho_max,
                kernel: self.kernel.build()?,
                initial_size: self.initial_size,
                xi_fraction: self.xi_fraction,
                stop_fraction: self.stop_fraction,
                templates_per_image: self.templates_per_image,
                ..OptaParams::default()
            },
            initial_threshold,
            record: false,
        })
    }
}
