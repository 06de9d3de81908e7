//! ESPRIT and MUSIC on the Hankel matrix of the samples.
//!
//! The samples `y_m = μ̃(m − (n−1))`, `m = 0..2n−2`, form the `p×(2n−p)`
//! Hankel matrix `H[i][j] = y_{i+j}`. Without noise its column space is
//! spanned by the vectors `(z_k^i)_{i<p}` with `z_k = e^{−iλ_k}`, so both
//! methods need the model order `K` as input.
//!
//! The leading `K` left singular vectors are computed by block subspace
//! iteration with FFT-based products, which costs `O(n log n)` per block
//! column instead of the `O(n³)` of a dense decomposition.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::angle::wrap_angle;
use crate::error::{Error, Result};
use crate::fft;
use crate::model::SampleLine;

/// Singular values below `RANK_TOL · s_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceConfig {
    /// Hankel rows `p`; `None` picks `⌊(2n−1)/2⌋`.
    pub hankel_rows: Option<usize>,
    /// Model order `K`.
    pub model_order: usize,
    /// Pseudospectrum grid size for MUSIC.
    pub music_grid: usize,
    /// Minimum circular distance between MUSIC peaks.
    pub music_min_separation: f64,
    /// Extra block columns carried by the subspace iteration.
    pub oversampling: usize,
    pub max_iterations: usize,
    /// Stop once the leading singular values change by less than this
    /// (relative) between sweeps.
    pub tolerance: f64,
    /// Seed of the starting block.
    pub seed: u64,
}

impl SubspaceConfig {
    pub fn new(model_order: usize) -> Self {
        Self {
            hankel_rows: None,
            model_order,
            music_grid: 8192,
            music_min_separation: 0.0,
            oversampling: 10,
            max_iterations: 300,
            tolerance: 1e-10,
            seed: 0x5eed_cafe,
        }
    }

    /// `(p, L)` for `2n − 1` samples.
    pub fn dimensions(&self, sample_count: usize) -> Result<(usize, usize)> {
        let p = self.hankel_rows.unwrap_or(sample_count / 2);
        if p == 0 || p > sample_count {
            return Err(Error::InvalidParameter("Hankel row count out of range"));
        }
        let l = sample_count + 1 - p;
        if self.model_order < 1 || self.model_order >= p || p > l {
            return Err(Error::InvalidParameter("need 1 <= K < p <= 2n - p"));
        }
        Ok((p, l))
    }
}

/// Matrix-free `H` and `Hᴴ` for a Hankel matrix, via zero-padded FFTs.
#[derive(Debug, Clone)]
pub struct HankelOperator {
    rows: usize,
    cols: usize,
    fft_len: usize,
    y_hat: Vec<Complex64>,
}

impl HankelOperator {
    pub fn new(y: &[Complex64], rows: usize) -> Result<Self> {
        if rows == 0 || rows > y.len() {
            return Err(Error::InvalidParameter("Hankel row count out of range"));
        }
        let cols = y.len() + 1 - rows;
        let fft_len = (y.len() + rows.max(cols)).next_power_of_two();
        let mut y_hat = alloc::vec![Complex64::new(0.0, 0.0); fft_len];
        y_hat[..y.len()].copy_from_slice(y);
        fft::forward_in_place(&mut y_hat);
        Ok(Self {
            rows,
            cols,
            fft_len,
            y_hat,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    // out_i = Σ_j y_{i+j} x_j, i < out_len
    fn correlate(&self, x: &[Complex64], out_len: usize) -> Vec<Complex64> {
        let m = self.fft_len;
        let mut buf = alloc::vec![Complex64::new(0.0, 0.0); m];
        for (j, &v) in x.iter().enumerate() {
            buf[x.len() - 1 - j] = v;
        }
        fft::forward_in_place(&mut buf);
        for (b, &yh) in buf.iter_mut().zip(&self.y_hat) {
            *b *= yh;
        }
        fft::inverse_in_place(&mut buf);
        let scale = 1.0 / m as f64;
        (0..out_len).map(|i| buf[i + x.len() - 1] * scale).collect()
    }

    /// `H x` for `x` of length `L`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.correlate(x, self.rows)
    }

    /// `Hᴴ u` for `u` of length `p`.
    pub fn apply_adjoint(&self, u: &[Complex64]) -> Vec<Complex64> {
        let conj: Vec<Complex64> = u.iter().map(|v| v.conj()).collect();
        self.correlate(&conj, self.cols)
            .into_iter()
            .map(|v| v.conj())
            .collect()
    }

    fn apply_block(&self, block: &DMatrix<Complex64>, adjoint: bool) -> DMatrix<Complex64> {
        let out_rows = if adjoint { self.cols } else { self.rows };
        let mut out = DMatrix::zeros(out_rows, block.ncols());
        for c in 0..block.ncols() {
            let col: Vec<Complex64> = block.column(c).iter().copied().collect();
            let r = if adjoint {
                self.apply_adjoint(&col)
            } else {
                self.apply(&col)
            };
            out.set_column(c, &DVector::from_vec(r));
        }
        out
    }

    /// Dense `p×L` matrix, for small problems and tests.
    pub fn to_dense(&self, y: &[Complex64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| y[i + j])
    }
}

fn orthonormalize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    m.qr().q()
}

/// Leading left singular vectors of the Hankel matrix.
#[derive(Debug, Clone)]
pub struct SignalSubspace {
    /// `p×K`, orthonormal columns.
    pub basis: DMatrix<Complex64>,
    /// Leading singular value estimates, descending.
    pub singular_values: Vec<f64>,
    pub iterations: usize,
}

/// Hermitian `G = WᴴW` → (descending eigenvalues, eigenvectors in matching
/// column order).
fn gram_eigen(w: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let g = w.adjoint() * w;
    let svd = g.svd(true, false);
    let u = svd.u.expect("left vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    (values, vectors)
}

/// Leading `K` left singular vectors of the Hankel matrix of `samples`.
pub fn signal_subspace(samples: &SampleLine, cfg: &SubspaceConfig) -> Result<SignalSubspace> {
    let y = samples.values();
    let (p, l) = cfg.dimensions(y.len())?;
    let k = cfg.model_order;
    let op = HankelOperator::new(y, p)?;
    let block = (k + cfg.oversampling).min(p).min(l);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let omega = DMatrix::from_fn(l, block, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let mut q = orthonormalize(op.apply_block(&omega, false));
    let mut previous: Vec<f64> = alloc::vec![0.0; k];
    let mut iterations = 0;
    let (values, vectors) = loop {
        let w = op.apply_block(&q, true);
        let (values, vectors) = gram_eigen(&w);
        iterations += 1;
        let converged = values[..k]
            .iter()
            .zip(&previous)
            .all(|(v, p)| (v - p).abs() <= cfg.tolerance * v.abs().max(f64::MIN_POSITIVE));
        if converged || iterations >= cfg.max_iterations {
            break (values, vectors);
        }
        previous.copy_from_slice(&values[..k]);
        q = orthonormalize(op.apply_block(&orthonormalize(w), false));
    };

    let singular: Vec<f64> = values.iter().map(|v| libm::sqrt(v.max(0.0))).collect();
    let top = singular.first().copied().unwrap_or(0.0);
    let rank = singular.iter().filter(|&&s| s > RANK_TOL * top && s > 0.0).count();
    if rank < k {
        return Err(Error::RankDeficient { rank, order: k });
    }
    let basis = &q * vectors.columns(0, k);
    Ok(SignalSubspace {
        basis,
        singular_values: singular[..k].to_vec(),
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceEstimate {
    pub lambda_hat: f64,
    pub amp_hat: f64,
}

/// Least-squares amplitudes for `μ̃(ℓ) ≈ Σ_k c_k e^{−iℓλ_k}`.
pub fn vandermonde_amplitudes(samples: &SampleLine, lambdas: &[f64]) -> Vec<Complex64> {
    if lambdas.is_empty() {
        return Vec::new();
    }
    let y = samples.values();
    let first = -(samples.degree() as f64 - 1.0);
    let v = DMatrix::from_fn(y.len(), lambdas.len(), |m, k| {
        let t = -(first + m as f64) * lambdas[k];
        Complex64::new(libm::cos(t), libm::sin(t))
    });
    let rhs = DVector::from_column_slice(y);
    v.svd(true, true)
        .solve(&rhs, 1e-12)
        .map(|c| c.iter().copied().collect())
        .unwrap_or_else(|_| alloc::vec![Complex64::new(0.0, 0.0); lambdas.len()])
}

/// ESPRIT frequency estimates from a signal subspace, sorted ascending.
pub fn esprit_from_subspace(sub: &SignalSubspace) -> Result<Vec<f64>> {
    let u = &sub.basis;
    let p = u.nrows();
    let k = u.ncols();
    let top = u.rows(0, p - 1).into_owned();
    let bottom = u.rows(1, p - 1).into_owned();
    let psi = top
        .svd(true, true)
        .solve(&bottom, 1e-14)
        .map_err(|_| Error::RankDeficient { rank: 0, order: k })?;
    let eig = psi
        .schur()
        .eigenvalues()
        .ok_or(Error::RankDeficient { rank: 0, order: k })?;
    let mut lambdas: Vec<f64> = eig.iter().map(|z| wrap_angle(-z.arg())).collect();
    lambdas.sort_by(f64::total_cmp);
    Ok(lambdas)
}

/// ESPRIT with `K` supplied; amplitudes by least squares.
pub fn esprit_1d(samples: &SampleLine, cfg: &SubspaceConfig) -> Result<Vec<SubspaceEstimate>> {
    let sub = signal_subspace(samples, cfg)?;
    let lambdas = esprit_from_subspace(&sub)?;
    let amps = vandermonde_amplitudes(samples, &lambdas);
    Ok(lambdas
        .into_iter()
        .zip(amps)
        .map(|(lambda_hat, a)| SubspaceEstimate {
            lambda_hat,
            amp_hat: a.norm(),
        })
        .collect())
}

/// `1 / (p − ‖U_sᴴ a(x)‖²)` on `x_j = −π + 2πj/G`, with steering vector
/// `a(x)_i = e^{−iix}`.
pub fn music_pseudospectrum(sub: &SignalSubspace, grid: usize) -> Result<Vec<f64>> {
    if grid < 2 || !grid.is_power_of_two() {
        return Err(Error::InvalidParameter("MUSIC grid must be a power of two"));
    }
    let p = sub.basis.nrows();
    let mut projection = alloc::vec![0.0; grid];
    for k in 0..sub.basis.ncols() {
        // Σ_i conj(u_ik) e^{−ii(−π + 2πj/G)} = Σ_i conj(u_ik)(−1)^i e^{−2πi ij/G}
        let mut buf = alloc::vec![Complex64::new(0.0, 0.0); grid];
        for i in 0..p {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            buf[i % grid] += sub.basis[(i, k)].conj() * sign;
        }
        fft::forward_in_place(&mut buf);
        for (acc, v) in projection.iter_mut().zip(&buf) {
            *acc += v.norm_sqr();
        }
    }
    Ok(projection
        .into_iter()
        .map(|s| 1.0 / (p as f64 - s).max(f64::MIN_POSITIVE))
        .collect())
}

/// MUSIC with `K` supplied: the `K` highest local maxima of the
/// pseudospectrum, greedily separated, sorted ascending.
pub fn music_from_subspace(sub: &SignalSubspace, cfg: &SubspaceConfig) -> Result<Vec<f64>> {
    let spec = music_pseudospectrum(sub, cfg.music_grid)?;
    let g = spec.len();
    let angle = |j: usize| -PI + TAU * j as f64 / g as f64;
    let mut candidates: Vec<usize> = (0..g)
        .filter(|&j| spec[j] > spec[(j + g - 1) % g] && spec[j] >= spec[(j + 1) % g])
        .collect();
    candidates.sort_by(|&a, &b| spec[b].total_cmp(&spec[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for j in candidates {
        if kept.len() == cfg.model_order {
            break;
        }
        if kept.iter().all(|&i| {
            crate::angle::circular_distance(angle(i), angle(j)) > cfg.music_min_separation
        }) {
            kept.push(j);
        }
    }
    let mut lambdas: Vec<f64> = kept.into_iter().map(angle).collect();
    lambdas.sort_by(f64::total_cmp);
    Ok(lambdas)
}

pub fn music_1d(samples: &SampleLine, cfg: &SubspaceConfig) -> Result<Vec<f64>> {
    let sub = signal_subspace(samples, cfg)?;
    music_from_subspace(&sub, cfg)
}

/// All singular values of the Hankel matrix, descending (dense SVD).
pub fn hankel_singular_values(samples: &SampleLine, cfg: &SubspaceConfig) -> Result<Vec<f64>> {
    let y = samples.values();
    let p = cfg.hankel_rows.unwrap_or(y.len() / 2).max(1);
    let op = HankelOperator::new(y, p)?;
    let mut sv: Vec<f64> = op.to_dense(y).singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}
