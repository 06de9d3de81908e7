//! The five subcommands as library functions. Each writes into `out` and
//! returns the paths it produced, in creation order.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use expsep_core::baselines::{hankel_singular_values, vandermonde_amplitudes};
use expsep_core::filter::KernelWeights;
use expsep_core::model::{SampleLine, SamplingLine};
use expsep_core::multidim::MatchReport;
use expsep_core::recovery::verify_theorem_conditions;
use expsep_core::spectrum::kernel_profile;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Method;
use crate::dataset::{read_json, write_json, Dataset, NamedDirection};
use crate::error::{Error, Result};
use crate::formats::{
    assembled_records, read_samples, write_bench, write_profile, write_samples,
    write_singular_values, write_spectrum, write_thresholded_spectrum, BenchRow, ConditionRecord,
    LineRecord, MatchRecord, RecoveredRecord,
};
use crate::pipeline::{match_frequencies, noise_seed, scene_seed, trial_seed, Experiment};

pub const MANIFEST: &str = "manifest.json";
pub const MODEL: &str = "model.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestLine {
    pub file: String,
    pub accurate_dir: usize,
    pub coarse_dir: usize,
    pub offset: Vec<f64>,
    pub direction: Vec<f64>,
    pub noise_seed: u64,
    pub noise_sigma: f64,
    pub rows: usize,
}

/// Seeds and line geometry of a synthesized dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub n: usize,
    pub base_seed: u64,
    pub trial: usize,
    pub trial_seed: u64,
    pub scene_seed: Option<u64>,
    /// Decimal dB, or `"inf"` for noiseless data.
    pub snr_db: String,
    pub noise_family: String,
    pub samples: usize,
    pub lines: Vec<ManifestLine>,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn line_names(exp: &Experiment) -> Vec<NamedDirection> {
    exp.basis
        .rows()
        .iter()
        .enumerate()
        .map(|(d, r)| NamedDirection {
            name: format!("delta_{}", d + 1),
            direction: r.clone(),
        })
        .collect()
}

/// Writes the truth (`model.json`), one `samples_<i>.csv` per line and a
/// manifest, for trial 0 at the first configured SNR.
pub fn cmd_synth(exp: &Experiment, base_seed: u64, out: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let ts = trial_seed(base_seed, 0);
    let truth = exp.truth(ts)?;
    let samples = exp.sample(&truth, 0, ts)?;
    let mut written = Vec::new();

    let model_path = out.join(MODEL);
    Dataset::from_model(&truth, line_names(exp)).save(&model_path)?;
    written.push(model_path);

    let mut lines = Vec::new();
    for (i, (plan, s)) in exp.plans.iter().zip(&samples).enumerate() {
        let file = format!("samples_{i}.csv");
        let path = out.join(&file);
        write_samples(&path, s)?;
        written.push(path);
        lines.push(ManifestLine {
            file,
            accurate_dir: plan.accurate_dir,
            coarse_dir: plan.coarse_dir,
            offset: plan.line.offset().to_vec(),
            direction: plan.line.direction().to_vec(),
            noise_seed: noise_seed(ts, 0, i),
            noise_sigma: s.noise_sigma(),
            rows: s.values().len(),
        });
    }
    let manifest = Manifest {
        name: exp.config.label().to_string(),
        n: exp.config.n,
        base_seed,
        trial: 0,
        trial_seed: ts,
        scene_seed: exp.is_synthetic().then(|| scene_seed(ts)),
        snr_db: exp.config.noise.snr_db[0].to_string(),
        noise_family: format!("{:?}", exp.config.noise.family).to_lowercase(),
        samples: exp.samples_per_trial(),
        lines,
    };
    let path = out.join(MANIFEST);
    write_json(&path, &manifest)?;
    written.push(path);
    Ok(written)
}

/// Loads a directory written by [`cmd_synth`].
pub fn load_synth(exp: &Experiment, dir: &Path) -> Result<(Dataset, Vec<SampleLine>)> {
    let manifest: Manifest = read_json(&dir.join(MANIFEST))?;
    let dataset = Dataset::load(&dir.join(MODEL))?;
    if manifest.n != exp.config.n || manifest.lines.len() != exp.plans.len() {
        return Err(Error::config(format!(
            "{} does not match the configured degree and line scheme",
            dir.display()
        )));
    }
    let mut samples = Vec::new();
    for (plan, ml) in exp.plans.iter().zip(&manifest.lines) {
        if plan.accurate_dir != ml.accurate_dir
            || plan.coarse_dir != ml.coarse_dir
            || plan.line.direction() != ml.direction.as_slice()
            || plan.line.offset() != ml.offset.as_slice()
        {
            return Err(Error::config(format!(
                "line {} in {} does not match the configured directions",
                ml.file,
                dir.display()
            )));
        }
        let line = SamplingLine::new(ml.offset.clone(), ml.direction.clone(), manifest.n)?;
        let values = read_samples(&dir.join(&ml.file))?;
        samples.push(SampleLine::new(line, values, ml.noise_sigma)?);
    }
    Ok((dataset, samples))
}

/// Runs the pipeline on freshly synthesized data (or on a [`cmd_synth`]
/// directory) and writes `recovery.json`, `conditions.json`,
/// `assembled.json`, `match.json` and `spectrum_<i>.csv`.
pub fn cmd_recover(
    exp: &Experiment,
    base_seed: u64,
    samples_dir: Option<&Path>,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let (truth, samples) = match samples_dir {
        Some(dir) => {
            let (d, s) = load_synth(exp, dir)?;
            (d.model()?, s)
        }
        None => {
            let ts = trial_seed(base_seed, 0);
            let truth = exp.truth(ts)?;
            let s = exp.sample(&truth, 0, ts)?;
            (truth, s)
        }
    };
    let reference = exp.reference(&truth)?;
    let params = exp.params(&truth)?;
    let rec = exp.recover(&samples, &params, true)?;
    let mut written = Vec::new();

    let records: Vec<LineRecord> = rec
        .lines
        .iter()
        .enumerate()
        .map(|(index, l)| LineRecord {
            index,
            accurate_dir: l.plan.accurate_dir,
            coarse_dir: l.plan.coarse_dir,
            sources: l.sources.iter().map(RecoveredRecord::from).collect(),
        })
        .collect();
    let path = out.join("recovery.json");
    write_json(&path, &records)?;
    written.push(path);

    let mut conditions = Vec::new();
    for (i, l) in rec.lines.iter().enumerate() {
        let grid = l.grid.as_ref().expect("grids kept");
        let along = truth.along_line(&l.plan.line)?;
        let report = verify_theorem_conditions(
            grid,
            &params,
            &along,
            exp.config.recovery.localization_exponent,
        )?;
        conditions.push(ConditionRecord::new(i, &report));
        let path = out.join(format!("spectrum_{i}.csv"));
        write_spectrum(&path, grid)?;
        written.push(path);
    }
    let path = out.join("conditions.json");
    write_json(&path, &conditions)?;
    written.push(path);

    let path = out.join("assembled.json");
    write_json(&path, &assembled_records(&rec.assembled))?;
    written.push(path);

    let reports: Vec<MatchRecord> = exp
        .match_reports(&reference, &rec.assembled)?
        .iter()
        .map(MatchRecord::from)
        .collect();
    let path = out.join("match.json");
    write_json(&path, &reports)?;
    written.push(path);
    Ok(written)
}

/// Outcome of one method on one `(snr, trial)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellOutcome {
    pub total_points: usize,
    pub matched: usize,
    pub rmse: Option<f64>,
    pub seconds: f64,
}

fn outcome(total: usize, report: &MatchReport, start: Instant) -> CellOutcome {
    CellOutcome {
        total_points: total,
        matched: report.matched,
        rmse: report.rmse,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Method labels in bench order: the localized kernel, then the baselines.
pub fn bench_methods(exp: &Experiment) -> Vec<&'static str> {
    let mut m = vec!["localized"];
    m.extend(exp.config.baselines.methods.iter().map(|b| b.label()));
    m
}

/// Every cell of one trial, indexed `[snr][method]`, matched at the first
/// configured radius.
pub fn bench_trial(exp: &Experiment, base_seed: u64, trial: usize) -> Result<Vec<Vec<CellOutcome>>> {
    let ts = trial_seed(base_seed, trial);
    let truth = exp.truth(ts)?;
    let reference = exp.reference(&truth)?;
    let params = exp.params(&truth)?;
    let radius = exp.config.matching.radii[0];
    let k = truth.len();
    let mut cells = Vec::new();
    for s in 0..exp.config.noise.snr_db.len() {
        let samples = exp.sample(&truth, s, ts)?;
        let mut row = Vec::new();

        let start = Instant::now();
        let rec = exp.recover(&samples, &params, false)?;
        let report = expsep_core::multidim::match_model(&reference, &rec.assembled, radius)?;
        row.push(outcome(k, &report, start));

        for &method in &exp.config.baselines.methods {
            let start = Instant::now();
            let cfg = exp.subspace_config(&truth, noise_seed(ts, s, usize::MAX));
            let lambdas = exp.run_baseline(method, &samples[0], &cfg)?;
            let report = match_frequencies(&reference, &lambdas, radius)?;
            row.push(outcome(k, &report, start));
        }
        cells.push(row);
    }
    Ok(cells)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs every trial (in parallel when a pool is available) and aggregates
/// in `(snr, method)` order. Trials with no match are left out of the RMSE
/// statistics.
pub fn run_bench(exp: &Experiment, base_seed: u64) -> Result<Vec<BenchRow>> {
    let trials: Vec<Vec<Vec<CellOutcome>>> = (0..exp.config.noise.trials)
        .into_par_iter()
        .map(|t| bench_trial(exp, base_seed, t))
        .collect::<Result<_>>()?;
    let methods = bench_methods(exp);
    let timing = exp.config.bench.timing;
    let mut rows = Vec::new();
    for (s, &snr) in exp.config.noise.snr_db.iter().enumerate() {
        for (m, label) in methods.iter().enumerate() {
            let cells: Vec<&CellOutcome> = trials.iter().map(|t| &t[s][m]).collect();
            let count = cells.len() as f64;
            let rmses: Vec<f64> = cells.iter().filter_map(|c| c.rmse).collect();
            let (rmse_mean, rmse_std) = mean_std(&rmses);
            rows.push(BenchRow {
                snr_db: snr,
                method: label.to_string(),
                samples: if m == 0 {
                    exp.samples_per_trial()
                } else {
                    exp.plans[0].line.sample_count()
                },
                total_points: cells.iter().map(|c| c.total_points as f64).sum::<f64>() / count,
                recuperated_mean: cells.iter().map(|c| c.matched as f64).sum::<f64>() / count,
                rmse_mean,
                rmse_std,
                runtime_s: if timing {
                    cells.iter().map(|c| c.seconds).sum::<f64>() / count
                } else {
                    0.0
                },
            });
        }
    }
    Ok(rows)
}

/// [`run_bench`] written to `bench.csv`.
pub fn cmd_bench(exp: &Experiment, base_seed: u64, out: &Path) -> Result<(Vec<PathBuf>, Vec<BenchRow>)> {
    ensure_dir(out)?;
    let rows = run_bench(exp, base_seed)?;
    let path = out.join("bench.csv");
    write_bench(&path, &rows)?;
    Ok((vec![path], rows))
}

/// Kernel profiles `kernel_<n>.csv`, the thresholded spectrum of the first
/// line (`sigma.csv`) and the Hankel singular values of the same samples
/// (`singular_values.csv`).
pub fn cmd_plotdata(exp: &Experiment, base_seed: u64, out: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out)?;
    let mut written = Vec::new();
    let filter = match exp.config.transition_sharpness {
        Some(a) => expsep_core::filter::LowPassFilter::new(a)?,
        None => Default::default(),
    };
    for &n in &exp.config.plot.kernel_degrees {
        let w = KernelWeights::new(&filter, n)?;
        let profile = kernel_profile(&w, exp.config.plot.kernel_grid)?;
        let path = out.join(format!("kernel_{n}.csv"));
        write_profile(&path, &profile)?;
        written.push(path);
    }

    let ts = trial_seed(base_seed, 0);
    let truth = exp.truth(ts)?;
    let params = exp.params(&truth)?;
    let samples = exp.sample(&truth, 0, ts)?;
    let grid = expsep_core::spectrum::eval_sigma_grid(&samples[0], &exp.weights, exp.grid_size)?;
    let path = out.join("sigma.csv");
    write_thresholded_spectrum(&path, &grid, params.threshold())?;
    written.push(path);

    let cfg = exp.subspace_config(&truth, ts);
    let sv = hankel_singular_values(&samples[0], &cfg)?;
    let path = out.join("singular_values.csv");
    write_singular_values(&path, &sv)?;
    written.push(path);
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEstimate {
    pub lambda_hat: f64,
    pub amp_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub method: String,
    pub model_order: usize,
    pub estimates: Vec<BaselineEstimate>,
    pub matches: Vec<MatchRecord>,
}

/// ESPRIT and/or MUSIC (every configured method, ESPRIT when none is
/// configured) on trial 0 at the first SNR: `baseline.json` plus the
/// Hankel singular values.
pub fn cmd_baseline(exp: &Experiment, base_seed: u64, out: &Path) -> Result<Vec<PathBuf>> {
    if exp.dim() != 1 {
        return Err(Error::config("baselines run on univariate models only"));
    }
    ensure_dir(out)?;
    let ts = trial_seed(base_seed, 0);
    let truth = exp.truth(ts)?;
    let reference = exp.reference(&truth)?;
    let samples = exp.sample(&truth, 0, ts)?;
    let cfg = exp.subspace_config(&truth, noise_seed(ts, 0, usize::MAX));
    let methods = if exp.config.baselines.methods.is_empty() {
        vec![Method::Esprit]
    } else {
        exp.config.baselines.methods.clone()
    };
    let mut records = Vec::new();
    for method in methods {
        let lambdas = exp.run_baseline(method, &samples[0], &cfg)?;
        let amps = vandermonde_amplitudes(&samples[0], &lambdas);
        let matches = exp
            .config
            .matching
            .radii
            .iter()
            .map(|&r| match_frequencies(&reference, &lambdas, r).map(|m| MatchRecord::from(&m)))
            .collect::<Result<Vec<_>>>()?;
        records.push(BaselineRecord {
            method: method.label().to_string(),
            model_order: cfg.model_order,
            estimates: lambdas
                .iter()
                .zip(&amps)
                .map(|(&lambda_hat, a)| BaselineEstimate {
                    lambda_hat,
                    amp_hat: a.norm(),
                })
                .collect(),
            matches,
        });
    }
    let mut written = Vec::new();
    let path = out.join("baseline.json");
    write_json(&path, &records)?;
    written.push(path);
    let path = out.join("singular_values.csv");
    write_singular_values(&path, &hankel_singular_values(&samples[0], &cfg)?)?;
    written.push(path);
    Ok(written)
}
