//! The reconstruction operator
//!
//! ```text
//! σ_n(x) = ℏ_n Σ_{|ℓ|<n} H(|ℓ|/n) μ̃(ℓ) e^{iℓx}
//! ```
//!
//! evaluated on the uniform grid `x_j = −π + 2πj/N` with one inverse FFT,
//! or pointwise by direct summation.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::filter::KernelWeights;
use crate::model::{cis, draw_noise, NoiseFamily, SampleLine};
use crate::seed::derive_seed;

/// `⌈4πn⌉`, the smallest admissible grid for degree `n`.
pub fn min_grid_size(n: usize) -> usize {
    libm::ceil(4.0 * PI * n as f64) as usize
}

/// Smallest power of two that is at least `16n` (and at least `⌈4πn⌉`).
pub fn default_grid_size(n: usize) -> usize {
    (16 * n).max(min_grid_size(n)).max(1).next_power_of_two()
}

/// Grid node `x_j = −π + 2πj/N`.
pub fn grid_angle(j: usize, grid_size: usize) -> f64 {
    -PI + TAU * j as f64 / grid_size as f64
}

/// `|σ_n|` and `arg σ_n` on the grid `x_j = −π + 2πj/N`.
#[derive(Debug, Clone)]
pub struct SpectrumGrid {
    samples: SampleLine,
    weights: KernelWeights,
    values: Vec<Complex64>,
}

impl SpectrumGrid {
    pub fn degree(&self) -> usize {
        self.weights.degree()
    }

    /// Number of grid nodes `N`.
    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn samples(&self) -> &SampleLine {
        &self.samples
    }

    pub fn weights(&self) -> &KernelWeights {
        &self.weights
    }

    pub fn angle(&self, j: usize) -> f64 {
        grid_angle(j, self.values.len())
    }

    /// Node spacing `2π/N`.
    pub fn spacing(&self) -> f64 {
        TAU / self.values.len() as f64
    }

    pub fn modulus(&self, j: usize) -> f64 {
        self.values[j].norm()
    }

    /// `σ_n(x)` by direct summation.
    pub fn eval_point(&self, x: f64) -> Complex64 {
        direct_sum(self.samples.values(), &self.weights, x)
    }

    /// Nearest grid index to an arbitrary angle.
    pub fn nearest_index(&self, x: f64) -> usize {
        let n = self.values.len();
        let t = crate::angle::wrap_angle(x) + PI;
        (libm::round(t / TAU * n as f64) as usize) % n
    }
}

fn check_grid(n: usize, grid_size: usize) -> Result<()> {
    let min = min_grid_size(n);
    if !grid_size.is_power_of_two() || grid_size < min {
        return Err(Error::GridTooSmall {
            grid: grid_size,
            min,
        });
    }
    Ok(())
}

// Places ℏ·w_ℓ·c_ℓ at bin ℓ mod N, inverse-transforms, and rotates by N/2 so
// index j corresponds to −π + 2πj/N.
fn grid_transform(
    coefficients: impl Iterator<Item = (isize, Complex64)>,
    grid_size: usize,
) -> Vec<Complex64> {
    let mut buf = alloc::vec![Complex64::new(0.0, 0.0); grid_size];
    let m = grid_size as isize;
    for (ell, c) in coefficients {
        buf[ell.rem_euclid(m) as usize] += c;
    }
    fft::inverse_in_place(&mut buf);
    buf.rotate_left(grid_size / 2);
    buf
}

/// Evaluates `σ_n` on the `N`-point grid.
pub fn eval_sigma_grid(
    samples: &SampleLine,
    weights: &KernelWeights,
    grid_size: usize,
) -> Result<SpectrumGrid> {
    if samples.degree() != weights.degree() {
        return Err(Error::DegreeMismatch {
            samples: samples.degree(),
            weights: weights.degree(),
        });
    }
    check_grid(weights.degree(), grid_size)?;
    let hbar = weights.hbar();
    let values = grid_transform(
        weights
            .iter()
            .zip(samples.values())
            .map(|((ell, w), &mu)| (ell, mu * (w * hbar))),
        grid_size,
    );
    Ok(SpectrumGrid {
        samples: samples.clone(),
        weights: weights.clone(),
        values,
    })
}

// Re-anchor the phasor recurrence from exact trig this often.
const RESEED: usize = 64;

fn direct_sum(values: &[Complex64], weights: &KernelWeights, x: f64) -> Complex64 {
    let first = -(weights.degree() as f64 - 1.0);
    let step = cis(x);
    let mut phasor = Complex64::new(0.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, (&w, &mu)) in weights.weights().iter().zip(values).enumerate() {
        if i % RESEED == 0 {
            phasor = cis((first + i as f64) * x);
        } else {
            phasor *= step;
        }
        acc += mu * phasor * w;
    }
    acc * weights.hbar()
}

/// `σ_n(x)` by direct O(n) summation.
pub fn eval_sigma_point(samples: &SampleLine, weights: &KernelWeights, x: f64) -> Result<Complex64> {
    if samples.degree() != weights.degree() {
        return Err(Error::DegreeMismatch {
            samples: samples.degree(),
            weights: weights.degree(),
        });
    }
    Ok(direct_sum(samples.values(), weights, x))
}

/// `Φ_n` on the `N`-point grid.
pub fn kernel_profile(weights: &KernelWeights, grid_size: usize) -> Result<Vec<Complex64>> {
    check_grid(weights.degree(), grid_size)?;
    let hbar = weights.hbar();
    Ok(grid_transform(
        weights.iter().map(|(ell, w)| (ell, Complex64::new(w * hbar, 0.0))),
        grid_size,
    ))
}

/// `Φ_n′` on the `N`-point grid.
pub fn kernel_derivative_profile(weights: &KernelWeights, grid_size: usize) -> Result<Vec<Complex64>> {
    check_grid(weights.degree(), grid_size)?;
    let hbar = weights.hbar();
    Ok(grid_transform(
        weights
            .iter()
            .map(|(ell, w)| (ell, Complex64::new(0.0, ell as f64 * w * hbar))),
        grid_size,
    ))
}

/// `sup_{|x| ≥ δ} |Φ_n(x)|` measured on the `N`-point grid.
pub fn kernel_tail_sup(weights: &KernelWeights, delta: f64, grid_size: usize) -> Result<f64> {
    let profile = kernel_profile(weights, grid_size)?;
    Ok(profile
        .iter()
        .enumerate()
        .filter(|(j, _)| libm::fabs(grid_angle(*j, grid_size)) >= delta)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max))
}

/// `L_emp = max_x |Φ_n(x)| · max(1, (n|x|)^S)` over the `N`-point grid: the
/// smallest constant for which `|Φ_n(x)| ≤ L / max(1, (n|x|)^S)` holds on the
/// grid.
pub fn empirical_localization_constant(
    weights: &KernelWeights,
    s: f64,
    grid_size: usize,
) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter("localization exponent must be positive"));
    }
    let n = weights.degree() as f64;
    let profile = kernel_profile(weights, grid_size)?;
    Ok(profile
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let nx = n * libm::fabs(grid_angle(j, grid_size));
            v.norm() * libm::pow(nx, s).max(1.0)
        })
        .fold(0.0, f64::max))
}

/// Per-trial `max_j |E_n(x_j)|` where `E_n` is the reconstruction operator
/// applied to pure complex Gaussian noise with parameter `sigma`. Trial `t`
/// uses seed `derive_seed(seed, t)`.
pub fn noise_spectrum_max(
    weights: &KernelWeights,
    sigma: f64,
    seed: u64,
    trials: usize,
    grid_size: usize,
) -> Result<Vec<f64>> {
    if trials < 1 {
        return Err(Error::InvalidParameter("at least one trial is required"));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidSigma(sigma));
    }
    check_grid(weights.degree(), grid_size)?;
    let hbar = weights.hbar();
    let count = 2 * weights.degree() - 1;
    Ok((0..trials)
        .map(|t| {
            let eps = draw_noise(
                count,
                NoiseFamily::ComplexGaussian,
                sigma,
                derive_seed(seed, t as u64),
            );
            let values = grid_transform(
                weights
                    .iter()
                    .zip(&eps)
                    .map(|((ell, w), &e)| (ell, e * (w * hbar))),
                grid_size,
            );
            values.iter().map(|v| v.norm()).fold(0.0, f64::max)
        })
        .collect())
}
