//! TOML experiment configuration.
//!
//! Relative paths inside a config file are resolved against the directory
//! that contains it, so bundled configs work from any working directory.

use std::fs;
use std::path::{Path, PathBuf};

use expsep_core::model::NoiseFamily;
use expsep_core::multidim::LineScheme;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    /// Kernel degree; each line carries `2n − 1` samples.
    pub n: usize,
    /// Spectrum grid size; defaults to the next power of two `>= 16n`.
    #[serde(default)]
    pub grid_size: Option<usize>,
    #[serde(default)]
    pub transition_sharpness: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub model: ModelConfig,
    pub noise: NoiseConfig,
    #[serde(default)]
    pub recovery: RecoveryConfig,
    #[serde(default)]
    pub directions: DirectionsConfig,
    #[serde(default)]
    pub matching: MatchingConfig,
    #[serde(default)]
    pub baselines: BaselineConfig,
    #[serde(default)]
    pub bench: BenchConfig,
    #[serde(default)]
    pub plot: PlotConfig,
}

/// Exactly one of `dataset` or `scene`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub scene: Option<SceneConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub q: usize,
    pub count: usize,
    #[serde(default = "unit_range")]
    pub amplitude: [f64; 2],
    /// Absolute per-direction separation floor. Overrides `floor_factor`.
    #[serde(default)]
    pub separation_floor: Option<f64>,
    /// Floor as a multiple of `π/n`.
    #[serde(default = "default_floor_factor")]
    pub floor_factor: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Draw frequencies uniformly in `[−h, h]^q` instead of uniformly in
    /// the projections.
    #[serde(default)]
    pub frequency_box: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[default]
    Gaussian,
    Uniform,
}

impl From<Family> for NoiseFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Gaussian => NoiseFamily::ComplexGaussian,
            Family::Uniform => NoiseFamily::BoundedUniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub family: Family,
    /// SNR values in dB; `inf` means noiseless.
    pub snr_db: Vec<f64>,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryConfig {
    /// Amplitude floor 𝔪; defaults to the smallest true amplitude.
    #[serde(default)]
    pub m_min: Option<f64>,
    /// Separation η; defaults to the smallest true separation over the
    /// sampled lines.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub refine: bool,
    #[serde(default = "default_exponent")]
    pub localization_exponent: f64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            m_min: None,
            eta: None,
            refine: false,
            localization_exponent: default_exponent(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Anchored,
    AllPairs,
}

impl From<Scheme> for LineScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Anchored => LineScheme::Anchored,
            Scheme::AllPairs => LineScheme::AllPairs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DirectionsConfig {
    /// Direction file; otherwise the dataset's lines, otherwise the
    /// standard basis.
    #[serde(default)]
    pub basis: Option<PathBuf>,
    #[serde(default)]
    pub scheme: Scheme,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingConfig {
    pub radii: Vec<f64>,
}

impl Default for MatchingConfig {
    fn default() -> Self {
        Self { radii: vec![0.05] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Esprit,
    Music,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Esprit => "esprit",
            Method::Music => "music",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    #[serde(default)]
    pub methods: Vec<Method>,
    /// Model order handed to the baselines; defaults to the true K.
    #[serde(default)]
    pub model_order: Option<usize>,
    #[serde(default)]
    pub hankel_rows: Option<usize>,
    #[serde(default)]
    pub music_grid: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Write measured wall-clock time; when false the column is 0 and the
    /// table is byte-identical across runs.
    #[serde(default = "yes")]
    pub timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { timing: true }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotConfig {
    #[serde(default = "default_kernel_degrees")]
    pub kernel_degrees: Vec<usize>,
    #[serde(default = "default_kernel_grid")]
    pub kernel_grid: usize,
}

impl Default for PlotConfig {
    fn default() -> Self {
        Self {
            kernel_degrees: default_kernel_degrees(),
            kernel_grid: default_kernel_grid(),
        }
    }
}

fn unit_range() -> [f64; 2] {
    [1.0, 1.0]
}
fn default_floor_factor() -> f64 {
    8.0
}
fn default_margin() -> f64 {
    0.1
}
fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_exponent() -> f64 {
    expsep_core::recovery::DEFAULT_LOCALIZATION_EXPONENT
}
fn default_kernel_degrees() -> Vec<usize> {
    vec![128]
}
fn default_kernel_grid() -> usize {
    8192
}

impl ExperimentConfig {
    /// Reads, resolves and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without touching the filesystem; relative paths stay as
    /// written.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.model.dataset.as_mut() {
            fix(p);
        }
        if let Some(p) = self.directions.basis.as_mut() {
            fix(p);
        }
        if let Some(p) = self.out.as_mut() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::config("n must be at least 1"));
        }
        match (&self.model.dataset, &self.model.scene) {
            (Some(p), None) => {
                if !p.is_file() {
                    return Err(Error::config(format!("dataset {} not found", p.display())));
                }
            }
            (None, Some(s)) => {
                if s.q < 1 || s.count < 1 {
                    return Err(Error::config("scene needs q >= 1 and count >= 1"));
                }
                if !(s.amplitude[0] > 0.0 && s.amplitude[1] >= s.amplitude[0]) {
                    return Err(Error::config("scene amplitude range must satisfy 0 < lo <= hi"));
                }
            }
            _ => {
                return Err(Error::config(
                    "model needs exactly one of 'dataset' or 'scene'",
                ))
            }
        }
        if let Some(p) = &self.directions.basis {
            if !p.is_file() {
                return Err(Error::config(format!("basis {} not found", p.display())));
            }
        }
        if self.noise.snr_db.is_empty() {
            return Err(Error::config("noise.snr_db must not be empty"));
        }
        if self.noise.snr_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(Error::config("noise.snr_db entries must be numbers or inf"));
        }
        if self.noise.trials < 1 {
            return Err(Error::config("noise.trials must be at least 1"));
        }
        if self.matching.radii.is_empty() || self.matching.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::config("matching.radii must be a nonempty list of positive radii"));
        }
        if let Some(m) = self.recovery.m_min {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::config("recovery.m_min must be positive"));
            }
        }
        if let Some(e) = self.recovery.eta {
            if !(e > 0.0 && e <= std::f64::consts::TAU) {
                return Err(Error::config("recovery.eta must lie in (0, 2π]"));
            }
        }
        if self.plot.kernel_degrees.contains(&0) {
            return Err(Error::config("plot.kernel_degrees must be positive"));
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or("experiment")
    }
}
