//! CSV and JSON outputs.

use std::fs::File;
use std::path::Path;

use expsep_core::model::SampleLine;
use expsep_core::multidim::{AssembledSources, MatchReport};
use expsep_core::recovery::{ConditionReport, RecoveredSource1D};
use expsep_core::spectrum::{grid_angle, SpectrumGrid};
use expsep_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BENCH_HEADER: [&str; 8] = [
    "snr_db",
    "method",
    "samples",
    "total_points",
    "recuperated_mean",
    "rmse_mean",
    "rmse_std",
    "runtime_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub ell: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub x: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct ThresholdRow {
    x: f64,
    re: f64,
    im: f64,
    abs: f64,
    threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub snr_db: f64,
    pub method: String,
    pub samples: usize,
    pub total_points: f64,
    pub recuperated_mean: f64,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub runtime_s: f64,
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| Error::format(path, e))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = writer(path)?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::format(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `ell,re,im`, one row per sample index.
pub fn write_samples(path: &Path, samples: &SampleLine) -> Result<()> {
    let rows = samples
        .line()
        .indices()
        .zip(samples.values())
        .map(|(ell, v)| SampleRow {
            ell: ell as i64,
            re: v.re,
            im: v.im,
        });
    write_rows(path, rows)
}

/// Reads a sample CSV back into `(ell, value)` order; indices must run
/// contiguously from `−(n−1)` to `n−1`.
pub fn read_samples(path: &Path) -> Result<Vec<Complex64>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::format(path, e))?;
    let mut values = Vec::new();
    let mut expected: Option<i64> = None;
    for row in r.deserialize::<SampleRow>() {
        let row = row.map_err(|e| Error::format(path, e))?;
        if let Some(e) = expected {
            if row.ell != e {
                return Err(Error::format(path, format!("expected ell = {e}, found {}", row.ell)));
            }
        }
        expected = Some(row.ell + 1);
        values.push(Complex64::new(row.re, row.im));
    }
    let count = values.len() as i64;
    if count % 2 == 0 || expected != Some((count + 1) / 2) {
        return Err(Error::format(path, "sample indices must be symmetric about 0"));
    }
    Ok(values)
}

/// `x,re,im,abs` over the grid.
pub fn write_spectrum(path: &Path, grid: &SpectrumGrid) -> Result<()> {
    write_profile(path, grid.values())
}

/// `x,re,im,abs` for values sampled at `x_j = −π + 2πj/N`.
pub fn write_profile(path: &Path, values: &[Complex64]) -> Result<()> {
    let size = values.len();
    let rows = values.iter().enumerate().map(|(j, v)| SpectrumRow {
        x: grid_angle(j, size),
        re: v.re,
        im: v.im,
        abs: v.norm(),
    });
    write_rows(path, rows)
}

/// `x,re,im,abs,threshold` with the constant threshold `𝔪/2`.
pub fn write_thresholded_spectrum(path: &Path, grid: &SpectrumGrid, threshold: f64) -> Result<()> {
    let rows = grid.values().iter().enumerate().map(|(j, v)| ThresholdRow {
        x: grid.angle(j),
        re: v.re,
        im: v.im,
        abs: v.norm(),
        threshold,
    });
    write_rows(path, rows)
}

/// One singular value per row under the header `singular_value`.
pub fn write_singular_values(path: &Path, values: &[f64]) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        singular_value: f64,
    }
    write_rows(path, values.iter().map(|&singular_value| Row { singular_value }))
}

/// Bench table; the header is written even when there are no rows.
pub fn write_bench(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::format(path, e))?;
    w.write_record(BENCH_HEADER).map_err(|e| Error::format(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::format(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredRecord {
    pub lambda_hat: f64,
    pub amp_hat: f64,
    pub phase_hat: f64,
    pub cluster_diameter: f64,
}

impl From<&RecoveredSource1D> for RecoveredRecord {
    fn from(s: &RecoveredSource1D) -> Self {
        Self {
            lambda_hat: s.lambda_hat,
            amp_hat: s.amp_hat,
            phase_hat: s.phase_hat,
            cluster_diameter: s.cluster_diameter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub index: usize,
    pub accurate_dir: usize,
    pub coarse_dir: usize,
    pub sources: Vec<RecoveredRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub line: usize,
    pub count_ok: bool,
    pub diameter_ok: bool,
    pub separation_ok: bool,
    pub inclusion_ok: bool,
    pub expected_components: usize,
    pub components: usize,
    pub connected_runs: usize,
    pub max_component_diameter: f64,
    pub diameter_bound: f64,
    pub min_component_distance: Option<f64>,
    pub separation_bound: f64,
    pub c_emp: f64,
    pub degree_sufficient: bool,
}

impl ConditionRecord {
    pub fn new(line: usize, r: &ConditionReport) -> Self {
        Self {
            line,
            count_ok: r.count_ok,
            diameter_ok: r.diameter_ok,
            separation_ok: r.separation_ok,
            inclusion_ok: r.inclusion_ok,
            expected_components: r.expected_components,
            components: r.components,
            connected_runs: r.connected_runs,
            max_component_diameter: r.component_diameters.iter().copied().fold(0.0, f64::max),
            diameter_bound: r.diameter_bound,
            min_component_distance: r.min_component_distance,
            separation_bound: r.separation_bound,
            c_emp: r.c_emp,
            degree_sufficient: r.degree_sufficient,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledRecord {
    pub w: Vec<f64>,
    pub amp: f64,
}

pub fn assembled_records(a: &AssembledSources) -> Vec<AssembledRecord> {
    a.points
        .iter()
        .map(|p| AssembledRecord {
            w: p.w.clone(),
            amp: p.amp,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub r: f64,
    pub matched: usize,
    pub rmse: Option<f64>,
    pub unmatched_truth: Vec<usize>,
    pub unmatched_est: Vec<usize>,
}

impl From<&MatchReport> for MatchRecord {
    fn from(m: &MatchReport) -> Self {
        Self {
            r: m.radius,
            matched: m.matched,
            rmse: m.rmse,
            unmatched_truth: m.unmatched_truth.clone(),
            unmatched_est: m.unmatched_est.clone(),
        }
    }
}
