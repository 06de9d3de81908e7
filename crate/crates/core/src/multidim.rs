//! Multivariate recovery from samples on a few lines.
//!
//! On the line `Δ_b + ℓΔ_a` the projected model has frequencies `⟨Δ_a, w_k⟩`
//! and amplitudes `A_k e^{−i⟨Δ_b, w_k⟩}`. The univariate recovery yields the
//! accurate coordinate `⟨Δ_a, w_k⟩` from the peak position and, for real
//! positive `A_k`, the coarse coordinate `⟨Δ_b, w_k⟩ = −arg σ_n` from the
//! phase at the peak. Estimates from different lines are paired through
//! the coordinates they share, and `ŵ` solves `Δŵ = b` with `b` the
//! accurate coordinates.
//!
//! Projections must lie in (−π, π]: coordinates are identifiable only modulo
//! 2π and no unwrapping is attempted. [`fold_model`] maps a model onto the
//! representative the pipeline can see.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::angle::{circular_distance, in_principal_range, wrap_angle};
use crate::error::{Error, Result};
use crate::filter::KernelWeights;
use crate::model::{PointSourceModel, SampleLine, SamplingLine, Source};
use crate::recovery::{estimate_sources, RecoveredSource1D, RecoveryParams};
use crate::spectrum::eval_sigma_grid;

/// Relative singular-value floor below which a basis counts as singular.
pub const BASIS_RCOND: f64 = 1e-10;

/// Rows `Δ_1, …, Δ_q` of an invertible `q×q` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionBasis {
    rows: Vec<Vec<f64>>,
    condition: f64,
    smallest_singular_value: f64,
}

impl DirectionBasis {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let q = rows.len();
        if q == 0 {
            return Err(Error::InvalidParameter("basis needs at least one direction"));
        }
        for r in &rows {
            if r.len() != q {
                return Err(Error::DimensionMismatch {
                    expected: q,
                    found: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("basis entries must be finite"));
            }
        }
        let m = DMatrix::from_fn(q, q, |i, j| rows[i][j]);
        let sv = m.singular_values();
        let largest = sv.max();
        let smallest = sv.min();
        if !(largest > 0.0) || smallest / largest < BASIS_RCOND {
            let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
            return Err(Error::SingularBasis(ratio));
        }
        Ok(Self {
            rows,
            condition: largest / smallest,
            smallest_singular_value: smallest,
        })
    }

    pub fn identity(q: usize) -> Result<Self> {
        Self::new(
            (0..q)
                .map(|i| (0..q).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, d: usize) -> &[f64] {
        &self.rows[d]
    }

    /// 2-norm condition number `s_max / s_min`.
    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// `‖Δ⁻¹‖₂ = 1 / s_min`: worst-case amplification of coordinate errors.
    pub fn inverse_norm(&self) -> f64 {
        1.0 / self.smallest_singular_value
    }

    /// `Δw`.
    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(w).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Solves `Δw = b` by LU factorization.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let q = self.dim();
        if b.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                found: b.len(),
            });
        }
        let m = DMatrix::from_fn(q, q, |i, j| self.rows[i][j]);
        let rhs = DVector::from_column_slice(b);
        m.lu()
            .solve(&rhs)
            .map(|w| w.iter().copied().collect())
            .ok_or(Error::SingularBasis(0.0))
    }
}

/// Maps every frequency to the representative `w′` with `Δw′ = wrap(Δw)`.
/// The samples of the folded model on any line `Δ_b + ℓΔ_a` equal those of
/// the original.
pub fn fold_model(model: &PointSourceModel, basis: &DirectionBasis) -> Result<PointSourceModel> {
    check_dim(model.dim(), basis.dim())?;
    let sources = model
        .sources()
        .iter()
        .map(|s| {
            let b: Vec<f64> = basis
                .project(&s.frequency)
                .into_iter()
                .map(wrap_angle)
                .collect();
            Ok(Source::new(s.amplitude, basis.solve(&b)?))
        })
        .collect::<Result<Vec<_>>>()?;
    PointSourceModel::new(model.dim(), sources)
}

/// Errors with [`Error::AliasedCoordinate`] on the first projection
/// `⟨Δ_d, w_k⟩` outside (−π, π].
pub fn check_unaliased(model: &PointSourceModel, basis: &DirectionBasis) -> Result<()> {
    check_dim(model.dim(), basis.dim())?;
    for (k, s) in model.sources().iter().enumerate() {
        for (d, v) in basis.project(&s.frequency).into_iter().enumerate() {
            if !in_principal_range(v) {
                return Err(Error::AliasedCoordinate {
                    source_index: k,
                    direction: d,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Which lines to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineScheme {
    /// `Δ_2 + ℓΔ_1` and `Δ_1 + ℓΔ_d` for `d = 2..q`: `q` lines.
    #[default]
    Anchored,
    /// `Δ_b + ℓΔ_a` for every ordered pair `a ≠ b`: `q(q−1)` lines.
    AllPairs,
}

/// A sampling line together with the roles of its two directions.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePlan {
    /// Direction read from the peak position (the line direction).
    pub accurate_dir: usize,
    /// Direction read from the phase (the line offset). Equals
    /// `accurate_dir` when `q = 1`.
    pub coarse_dir: usize,
    pub line: SamplingLine,
}

/// Sampling lines of `scheme` for degree `n`.
pub fn plan_lines(basis: &DirectionBasis, n: usize, scheme: LineScheme) -> Result<Vec<LinePlan>> {
    let q = basis.dim();
    let plan = |a: usize, b: usize| -> Result<LinePlan> {
        Ok(LinePlan {
            accurate_dir: a,
            coarse_dir: b,
            line: SamplingLine::new(basis.row(b).to_vec(), basis.row(a).to_vec(), n)?,
        })
    };
    if q == 1 {
        return Ok(alloc::vec![LinePlan {
            accurate_dir: 0,
            coarse_dir: 0,
            line: SamplingLine::new(alloc::vec![0.0], basis.row(0).to_vec(), n)?,
        }]);
    }
    match scheme {
        LineScheme::Anchored => {
            let mut plans = alloc::vec![plan(0, 1)?];
            for d in 1..q {
                plans.push(plan(d, 0)?);
            }
            Ok(plans)
        }
        LineScheme::AllPairs => {
            let mut plans = Vec::new();
            for a in 0..q {
                for b in 0..q {
                    if a != b {
                        plans.push(plan(a, b)?);
                    }
                }
            }
            Ok(plans)
        }
    }
}

/// Total number of samples consumed by a set of lines.
pub fn sample_budget(plans: &[LinePlan]) -> usize {
    plans.iter().map(|p| p.line.sample_count()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalSource {
    /// `⟨Δ_accurate, ŵ⟩` from the peak position.
    pub accurate: f64,
    /// `⟨Δ_coarse, ŵ⟩ = −arg σ_n(λ̂)`.
    pub coarse: f64,
    pub amp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalEstimate {
    pub accurate_dir: usize,
    pub coarse_dir: usize,
    pub sources: Vec<DirectionalSource>,
}

impl DirectionalEstimate {
    /// Value of direction `d` for source `k`, if this estimate knows it.
    fn coordinate(&self, k: usize, d: usize) -> Option<f64> {
        let s = &self.sources[k];
        if d == self.accurate_dir {
            Some(s.accurate)
        } else if d == self.coarse_dir {
            Some(s.coarse)
        } else {
            None
        }
    }

    /// Reads univariate recoveries on the line `(accurate_dir, coarse_dir)`
    /// as directional sources.
    pub fn from_recovered(
        accurate_dir: usize,
        coarse_dir: usize,
        recovered: &[RecoveredSource1D],
    ) -> Self {
        let sources = recovered
            .iter()
            .map(|s| DirectionalSource {
                accurate: s.lambda_hat,
                coarse: wrap_angle(-s.phase_hat),
                amp: s.amp_hat,
            })
            .collect();
        Self {
            accurate_dir,
            coarse_dir,
            sources,
        }
    }

    fn known_dirs(&self) -> Vec<usize> {
        if self.accurate_dir == self.coarse_dir {
            alloc::vec![self.accurate_dir]
        } else {
            alloc::vec![self.accurate_dir, self.coarse_dir]
        }
    }
}

/// Univariate recovery on one line, read as a directional estimate.
pub fn recover_direction_pair(
    samples: &SampleLine,
    weights: &KernelWeights,
    params: &RecoveryParams,
    grid_size: usize,
    accurate_dir: usize,
    coarse_dir: usize,
) -> Result<DirectionalEstimate> {
    let grid = eval_sigma_grid(samples, weights, grid_size)?;
    Ok(DirectionalEstimate::from_recovered(
        accurate_dir,
        coarse_dir,
        &estimate_sources(&grid, params),
    ))
}

const PAIRING_BANDS: [f64; 5] = [0.01, 0.05, 0.25, 1.0, f64::INFINITY];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub a_index: usize,
    pub b_index: usize,
    /// Circular distance over the shared coordinates.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub pairs: Vec<Pair>,
    pub unpaired_a: Vec<usize>,
    pub unpaired_b: Vec<usize>,
}

/// Greedy nearest-neighbour pairing of two directional estimates.
///
/// The distance between `a_i` and `b_j` is the Euclidean norm of the
/// circular differences over every direction both estimates report, e.g.
/// both coordinates when `a` is `(accurate d1, coarse d2)` and `b` is
/// `(accurate d2, coarse d1)`. The globally closest remaining pair is taken
/// repeatedly (ties to lower indices); leftovers are reported unpaired.
pub fn pair_estimates(a: &DirectionalEstimate, b: &DirectionalEstimate) -> Result<Pairing> {
    if a.sources.is_empty() || b.sources.is_empty() {
        return Err(Error::EmptyEstimate);
    }
    let b_dirs = b.known_dirs();
    let shared: Vec<usize> = a
        .known_dirs()
        .into_iter()
        .filter(|d| b_dirs.contains(d))
        .collect();
    if shared.is_empty() {
        return Err(Error::InvalidParameter("estimates share no direction"));
    }

    let distance = |i: usize, j: usize| {
        let sq: f64 = shared
            .iter()
            .map(|&d| {
                let diff = circular_distance(
                    a.coordinate(i, d).unwrap_or(0.0),
                    b.coordinate(j, d).unwrap_or(0.0),
                );
                diff * diff
            })
            .sum();
        libm::sqrt(sq)
    };

    // Greedy over the globally sorted candidate list, one distance band at
    // a time. Every pair below a band's cutoff between still-free sources is
    // taken before any longer one, so the result equals a single pass over
    // all pairs while only short pairs are ever stored.
    let mut used_a = alloc::vec![false; a.sources.len()];
    let mut used_b = alloc::vec![false; b.sources.len()];
    let mut pairs = Vec::new();
    for cutoff in PAIRING_BANDS {
        let mut candidates = Vec::new();
        for i in (0..a.sources.len()).filter(|&i| !used_a[i]) {
            for j in (0..b.sources.len()).filter(|&j| !used_b[j]) {
                let distance = distance(i, j);
                if distance <= cutoff {
                    candidates.push(Pair {
                        a_index: i,
                        b_index: j,
                        distance,
                    });
                }
            }
        }
        candidates.sort_by(|x, y| {
            x.distance
                .total_cmp(&y.distance)
                .then(x.a_index.cmp(&y.a_index))
                .then(x.b_index.cmp(&y.b_index))
        });
        for c in candidates {
            if !used_a[c.a_index] && !used_b[c.b_index] {
                used_a[c.a_index] = true;
                used_b[c.b_index] = true;
                pairs.push(c);
            }
        }
        if used_a.iter().all(|&u| u) || used_b.iter().all(|&u| u) {
            break;
        }
    }
    pairs.sort_by_key(|p| p.a_index);
    let leftovers = |used: &[bool]| {
        used.iter()
            .enumerate()
            .filter(|(_, &u)| !u)
            .map(|(i, _)| i)
            .collect()
    };
    Ok(Pairing {
        pairs,
        unpaired_a: leftovers(&used_a),
        unpaired_b: leftovers(&used_b),
    })
}

/// Accurate coordinates `b = (⟨Δ_1, ŵ⟩, …, ⟨Δ_q, ŵ⟩)` of one source.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateTuple {
    pub coords: Vec<f64>,
    pub amp: f64,
    /// Largest pairing distance used to build the tuple.
    pub pairing_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledPoint {
    pub w: Vec<f64>,
    pub amp: f64,
    pub pairing_distance: f64,
}

/// Pairing summary for two lines.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDiagnostic {
    /// `(accurate, coarse)` directions of the two estimates.
    pub a_dirs: (usize, usize),
    pub b_dirs: (usize, usize),
    pub paired: usize,
    pub unpaired_a: usize,
    pub unpaired_b: usize,
    pub max_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssembledSources {
    pub points: Vec<AssembledPoint>,
    /// Anchor sources without a partner on some line.
    pub unpaired: usize,
    pub diagnostics: Vec<PairDiagnostic>,
}

impl AssembledSources {
    pub fn k_hat(&self) -> usize {
        self.points.len()
    }

    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.w.clone()).collect()
    }
}

/// Solves `Δŵ = b` for each coordinate tuple.
pub fn assemble_full(tuples: &[CoordinateTuple], basis: &DirectionBasis) -> Result<AssembledSources> {
    let points = tuples
        .iter()
        .map(|t| {
            Ok(AssembledPoint {
                w: basis.solve(&t.coords)?,
                amp: t.amp,
                pairing_distance: t.pairing_distance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AssembledSources {
        points,
        unpaired: 0,
        diagnostics: Vec::new(),
    })
}

fn diagnostic(a: &DirectionalEstimate, b: &DirectionalEstimate, p: &Pairing) -> PairDiagnostic {
    PairDiagnostic {
        a_dirs: (a.accurate_dir, a.coarse_dir),
        b_dirs: (b.accurate_dir, b.coarse_dir),
        paired: p.pairs.len(),
        unpaired_a: p.unpaired_a.len(),
        unpaired_b: p.unpaired_b.len(),
        max_distance: p.pairs.iter().map(|x| x.distance).fold(0.0, f64::max),
    }
}

/// Assembles sources from directional estimates.
///
/// The anchor is the estimate with accurate direction 0 (coarse 1 when
/// `q ≥ 2`). For every `d ≥ 1` the estimate with accurate direction `d` and
/// coarse direction 0 supplies `⟨Δ_d, ŵ⟩` through its pairing with the
/// anchor. Anchor sources missing a partner are dropped and counted. Any
/// further estimates (all-pairs scheme) are paired `(a, b)` against
/// `(b, a)` and reported as diagnostics only.
pub fn assemble_estimates(
    estimates: &[DirectionalEstimate],
    basis: &DirectionBasis,
) -> Result<AssembledSources> {
    let q = basis.dim();
    let anchor_coarse = if q == 1 { 0 } else { 1 };
    let find = |acc: usize, coarse: usize| {
        estimates
            .iter()
            .find(|e| e.accurate_dir == acc && e.coarse_dir == coarse)
            .ok_or(Error::InvalidParameter("missing estimate for an anchored line"))
    };
    let anchor = find(0, anchor_coarse)?;
    if anchor.sources.is_empty() {
        return Err(Error::EmptyEstimate);
    }

    let k = anchor.sources.len();
    let mut coords: Vec<Vec<Option<f64>>> = anchor
        .sources
        .iter()
        .map(|s| {
            let mut c = alloc::vec![None; q];
            c[0] = Some(s.accurate);
            c
        })
        .collect();
    let mut worst = alloc::vec![0.0f64; k];
    let mut diagnostics = Vec::new();

    for d in 1..q {
        let other = find(d, 0)?;
        if other.sources.is_empty() {
            return Err(Error::EmptyEstimate);
        }
        let pairing = pair_estimates(anchor, other)?;
        for p in &pairing.pairs {
            coords[p.a_index][d] = Some(other.sources[p.b_index].accurate);
            worst[p.a_index] = worst[p.a_index].max(p.distance);
        }
        diagnostics.push(diagnostic(anchor, other, &pairing));
    }

    for (i, a) in estimates.iter().enumerate() {
        let anchored = (a.accurate_dir == 0 && a.coarse_dir == anchor_coarse) || a.coarse_dir == 0;
        if anchored || a.accurate_dir == a.coarse_dir {
            continue;
        }
        for b in &estimates[i + 1..] {
            if b.accurate_dir == a.coarse_dir && b.coarse_dir == a.accurate_dir {
                if a.sources.is_empty() || b.sources.is_empty() {
                    continue;
                }
                let pairing = pair_estimates(a, b)?;
                diagnostics.push(diagnostic(a, b, &pairing));
            }
        }
    }

    let mut tuples = Vec::new();
    let mut unpaired = 0;
    for (i, c) in coords.iter().enumerate() {
        if c.iter().all(Option::is_some) {
            tuples.push(CoordinateTuple {
                coords: c.iter().map(|v| v.unwrap_or(0.0)).collect(),
                amp: anchor.sources[i].amp,
                pairing_distance: worst[i],
            });
        } else {
            unpaired += 1;
        }
    }
    let mut out = assemble_full(&tuples, basis)?;
    out.unpaired = unpaired;
    out.diagnostics = diagnostics;
    Ok(out)
}

/// Runs the univariate recovery on every sampled line and assembles the
/// resulting estimates.
pub fn recover_from_lines(
    lines: &[(LinePlan, SampleLine)],
    basis: &DirectionBasis,
    weights: &KernelWeights,
    params: &RecoveryParams,
    grid_size: usize,
) -> Result<AssembledSources> {
    let estimates = lines
        .iter()
        .map(|(plan, samples)| {
            recover_direction_pair(
                samples,
                weights,
                params,
                grid_size,
                plan.accurate_dir,
                plan.coarse_dir,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    assemble_estimates(&estimates, basis)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub radius: f64,
    pub matched: usize,
    /// Root mean square distance over matched pairs; `None` if none matched.
    pub rmse: Option<f64>,
    /// `(truth index, estimate index, distance)`.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_truth: Vec<usize>,
    pub unmatched_est: Vec<usize>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Greedy closest-pair matching; a pair counts only if its Euclidean distance
/// is below `radius`.
pub fn match_points(truth: &[Vec<f64>], est: &[Vec<f64>], radius: f64) -> Result<MatchReport> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter("match radius must be positive"));
    }
    let mut candidates = Vec::new();
    for (i, t) in truth.iter().enumerate() {
        for (j, e) in est.iter().enumerate() {
            if t.len() != e.len() {
                return Err(Error::DimensionMismatch {
                    expected: t.len(),
                    found: e.len(),
                });
            }
            let d = euclidean(t, e);
            if d < radius {
                candidates.push((i, j, d));
            }
        }
    }
    candidates.sort_by(|x, y| x.2.total_cmp(&y.2).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));
    let mut used_t = alloc::vec![false; truth.len()];
    let mut used_e = alloc::vec![false; est.len()];
    let mut pairs = Vec::new();
    for (i, j, d) in candidates {
        if !used_t[i] && !used_e[j] {
            used_t[i] = true;
            used_e[j] = true;
            pairs.push((i, j, d));
        }
    }
    pairs.sort_by_key(|p| p.0);
    let rmse = if pairs.is_empty() {
        None
    } else {
        Some(libm::sqrt(
            pairs.iter().map(|p| p.2 * p.2).sum::<f64>() / pairs.len() as f64,
        ))
    };
    let unmatched = |used: &[bool]| {
        used.iter()
            .enumerate()
            .filter(|(_, &u)| !u)
            .map(|(i, _)| i)
            .collect()
    };
    Ok(MatchReport {
        radius,
        matched: pairs.len(),
        rmse,
        pairs,
        unmatched_truth: unmatched(&used_t),
        unmatched_est: unmatched(&used_e),
    })
}

/// [`match_points`] between a model's frequencies and assembled sources.
pub fn match_model(
    truth: &PointSourceModel,
    est: &AssembledSources,
    radius: f64,
) -> Result<MatchReport> {
    let t: Vec<Vec<f64>> = truth.sources().iter().map(|s| s.frequency.clone()).collect();
    match_points(&t, &est.frequencies(), radius)
}
