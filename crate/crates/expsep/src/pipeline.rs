//! One configured experiment: model, lines, kernel and the seeded stages
//! that turn them into samples, estimates and match reports.

use std::f64::consts::PI;

use expsep_core::baselines::{esprit_1d, music_1d, SubspaceConfig};
use expsep_core::filter::{KernelWeights, LowPassFilter};
use expsep_core::model::{NoiseLevel, NoiseSpec, PointSourceModel, SampleLine};
use expsep_core::multidim::{
    assemble_estimates, fold_model, match_model, match_points, plan_lines, sample_budget,
    AssembledSources, DirectionBasis, DirectionalEstimate, LinePlan, MatchReport,
};
use expsep_core::recovery::{estimate_sources, RecoveredSource1D, RecoveryParams};
use expsep_core::scene::{generate_scene, SceneBox, SceneSpec};
use expsep_core::seed::derive_seed;
use expsep_core::spectrum::{default_grid_size, eval_sigma_grid, SpectrumGrid};

use crate::config::{ExperimentConfig, Method};
use crate::dataset::{Dataset, DirectionSet};
use crate::error::{Error, Result};

/// Seed of trial `t` under `base`.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    derive_seed(base, trial as u64)
}

/// Seed of the synthetic scene drawn for a trial.
pub fn scene_seed(trial_seed: u64) -> u64 {
    derive_seed(trial_seed, 0)
}

/// Noise seed of line `line` at the `snr_index`-th SNR of a trial. The
/// scene seed occupies slot 0, so SNR slots start at 1.
pub fn noise_seed(trial_seed: u64, snr_index: usize, line: usize) -> u64 {
    derive_seed(derive_seed(trial_seed, 1 + snr_index as u64), line as u64)
}

/// `inf` dB means noiseless.
pub fn noise_level(snr_db: f64) -> NoiseLevel {
    if snr_db == f64::INFINITY {
        NoiseLevel::Sigma(0.0)
    } else {
        NoiseLevel::SnrDb(snr_db)
    }
}

#[derive(Debug, Clone)]
enum Truth {
    Fixed(PointSourceModel),
    Scene(SceneSpec),
}

/// Per-line recovery, with the grid kept when requested.
#[derive(Debug, Clone)]
pub struct LineRecovery {
    pub plan: LinePlan,
    pub sources: Vec<RecoveredSource1D>,
    pub grid: Option<SpectrumGrid>,
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub lines: Vec<LineRecovery>,
    pub assembled: AssembledSources,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub basis: DirectionBasis,
    pub plans: Vec<LinePlan>,
    pub weights: KernelWeights,
    pub grid_size: usize,
    truth: Truth,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let dataset = match &config.model.dataset {
            Some(p) => Some(Dataset::load(p)?),
            None => None,
        };
        let q = match (&dataset, &config.model.scene) {
            (Some(d), _) => d.q,
            (None, Some(s)) => s.q,
            (None, None) => unreachable!("validated"),
        };
        let basis = match (&config.directions.basis, &dataset) {
            (Some(p), _) => DirectionSet::load(p)?.basis()?,
            (None, Some(d)) => match d.basis()? {
                Some(b) => b,
                None => DirectionBasis::identity(q)?,
            },
            (None, None) => DirectionBasis::identity(q)?,
        };
        if basis.dim() != q {
            return Err(Error::config(format!(
                "basis has dimension {}, model has {q}",
                basis.dim()
            )));
        }
        let n = config.n;
        let plans = plan_lines(&basis, n, config.directions.scheme.into())?;
        let filter = match config.transition_sharpness {
            Some(a) => LowPassFilter::new(a)?,
            None => LowPassFilter::default(),
        };
        let weights = KernelWeights::new(&filter, n)?;
        let grid_size = config.grid_size.unwrap_or_else(|| default_grid_size(n));
        let truth = match (dataset, &config.model.scene) {
            (Some(d), _) => Truth::Fixed(d.model()?),
            (None, Some(s)) => Truth::Scene(SceneSpec {
                count: s.count,
                amplitude_range: (s.amplitude[0], s.amplitude[1]),
                separation_floor: s.separation_floor.unwrap_or(s.floor_factor * PI / n as f64),
                margin: s.margin,
                domain: match s.frequency_box {
                    Some(h) => SceneBox::Frequencies(h),
                    None => SceneBox::Projections,
                },
                ..SceneSpec::new(s.count, 0.0)
            }),
            (None, None) => unreachable!("validated"),
        };
        if !config.baselines.methods.is_empty() && q != 1 {
            return Err(Error::config("baselines run on univariate models only"));
        }
        Ok(Self {
            config,
            basis,
            plans,
            weights,
            grid_size,
            truth,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn samples_per_trial(&self) -> usize {
        sample_budget(&self.plans)
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self.truth, Truth::Scene(_))
    }

    /// Ground truth of a trial: the dataset, or a fresh scene.
    pub fn truth(&self, trial_seed: u64) -> Result<PointSourceModel> {
        match &self.truth {
            Truth::Fixed(m) => Ok(m.clone()),
            Truth::Scene(spec) => Ok(generate_scene(spec, &self.basis, scene_seed(trial_seed))?),
        }
    }

    /// The representative of `truth` that the lines can identify: every
    /// projection folded into `(−π, π]`.
    pub fn reference(&self, truth: &PointSourceModel) -> Result<PointSourceModel> {
        Ok(fold_model(truth, &self.basis)?)
    }

    /// Recovery parameters; unset values come from the truth.
    pub fn params(&self, truth: &PointSourceModel) -> Result<RecoveryParams> {
        let rc = &self.config.recovery;
        let m_min = rc.m_min.unwrap_or_else(|| truth.min_amplitude());
        let eta = match rc.eta {
            Some(e) => e,
            None => self
                .plans
                .iter()
                .map(|p| truth.along_line(&p.line).and_then(|m| m.min_separation()))
                .collect::<expsep_core::Result<Vec<f64>>>()?
                .into_iter()
                .fold(std::f64::consts::TAU, f64::min),
        };
        Ok(RecoveryParams::new(m_min, eta)?.with_refinement(rc.refine))
    }

    pub fn noise_spec(&self, snr_db: f64, seed: u64) -> NoiseSpec {
        NoiseSpec {
            family: self.config.noise.family.into(),
            level: noise_level(snr_db),
            seed,
        }
    }

    /// Noisy samples on every planned line.
    pub fn sample(
        &self,
        truth: &PointSourceModel,
        snr_index: usize,
        trial_seed: u64,
    ) -> Result<Vec<SampleLine>> {
        let snr = self.config.noise.snr_db[snr_index];
        self.plans
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let spec = self.noise_spec(snr, noise_seed(trial_seed, snr_index, i));
                Ok(SampleLine::noisy(truth, &p.line, &spec)?)
            })
            .collect()
    }

    /// Localized-kernel recovery on every line, then assembly. An anchor
    /// line with no peak above threshold yields an empty result.
    pub fn recover(
        &self,
        samples: &[SampleLine],
        params: &RecoveryParams,
        keep_grids: bool,
    ) -> Result<Recovery> {
        if samples.len() != self.plans.len() {
            return Err(Error::config(format!(
                "expected {} sample lines, found {}",
                self.plans.len(),
                samples.len()
            )));
        }
        let mut lines = Vec::with_capacity(samples.len());
        for (plan, s) in self.plans.iter().zip(samples) {
            let grid = eval_sigma_grid(s, &self.weights, self.grid_size)?;
            let sources = estimate_sources(&grid, params);
            lines.push(LineRecovery {
                plan: plan.clone(),
                sources,
                grid: keep_grids.then_some(grid),
            });
        }
        let estimates: Vec<DirectionalEstimate> = lines
            .iter()
            .map(|l| {
                DirectionalEstimate::from_recovered(
                    l.plan.accurate_dir,
                    l.plan.coarse_dir,
                    &l.sources,
                )
            })
            .collect();
        let assembled = match assemble_estimates(&estimates, &self.basis) {
            Ok(a) => a,
            Err(expsep_core::Error::EmptyEstimate) => AssembledSources::default(),
            Err(e) => return Err(e.into()),
        };
        Ok(Recovery { lines, assembled })
    }

    pub fn match_reports(
        &self,
        reference: &PointSourceModel,
        assembled: &AssembledSources,
    ) -> Result<Vec<MatchReport>> {
        self.config
            .matching
            .radii
            .iter()
            .map(|&r| Ok(match_model(reference, assembled, r)?))
            .collect()
    }

    pub fn subspace_config(&self, truth: &PointSourceModel, seed: u64) -> SubspaceConfig {
        let b = &self.config.baselines;
        let mut cfg = SubspaceConfig::new(b.model_order.unwrap_or(truth.len()));
        cfg.hankel_rows = b.hankel_rows;
        if let Some(g) = b.music_grid {
            cfg.music_grid = g;
        }
        cfg.seed = seed;
        cfg
    }

    /// Frequencies estimated by a subspace baseline on the single line of a
    /// univariate experiment.
    pub fn run_baseline(
        &self,
        method: Method,
        samples: &SampleLine,
        cfg: &SubspaceConfig,
    ) -> Result<Vec<f64>> {
        Ok(match method {
            Method::Esprit => esprit_1d(samples, cfg)?.into_iter().map(|e| e.lambda_hat).collect(),
            Method::Music => music_1d(samples, cfg)?,
        })
    }
}

/// Radius-`r` match between a univariate truth and bare frequencies.
pub fn match_frequencies(
    reference: &PointSourceModel,
    lambdas: &[f64],
    radius: f64,
) -> Result<MatchReport> {
    let truth: Vec<Vec<f64>> = reference.sources().iter().map(|s| s.frequency.clone()).collect();
    let est: Vec<Vec<f64>> = lambdas.iter().map(|&l| vec![l]).collect();
    Ok(match_points(&truth, &est, radius)?)
}
