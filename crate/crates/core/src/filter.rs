//! The smooth low-pass filter `H`, its kernel weights and the localized
//! kernel
//!
//! ```text
//! Φ_n(x) = ℏ_n Σ_{|ℓ|<n} H(|ℓ|/n) e^{iℓx},   ℏ_n = 1 / Σ_{|ℓ|<n} H(|ℓ|/n).
//! ```
//!
//! `H` equals one on `|t| ≤ 1/2`, vanishes on `|t| ≥ 1` and is C^∞. The
//! transition on `1/2 < |t| < 1` is the bump quotient
//! `s(u) = ψ(u) / (ψ(u) + ψ(1 − u))` with `ψ(u) = exp(−a/u)` for `u > 0`,
//! `u = 2|t| − 1`, and `a` the transition sharpness.
//!
//! Evaluations here are direct O(n) summations; grid evaluation lives in
//! [`crate::spectrum`].

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sharpness used by [`LowPassFilter::default`].
pub const DEFAULT_TRANSITION_SHARPNESS: f64 = 1.4;

/// C^∞ even low-pass filter with a flat plateau on `[-1/2, 1/2]` and support
/// in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowPassFilter {
    transition_sharpness: f64,
}

impl Default for LowPassFilter {
    fn default() -> Self {
        Self {
            transition_sharpness: DEFAULT_TRANSITION_SHARPNESS,
        }
    }
}

impl LowPassFilter {
    pub fn new(transition_sharpness: f64) -> Result<Self> {
        if !(transition_sharpness.is_finite() && transition_sharpness > 0.0) {
            return Err(Error::InvalidParameter(
                "transition sharpness must be positive and finite",
            ));
        }
        Ok(Self {
            transition_sharpness,
        })
    }

    pub fn transition_sharpness(&self) -> f64 {
        self.transition_sharpness
    }

    /// H(t). Defined on all of ℝ, values in [0, 1].
    pub fn evaluate(&self, t: f64) -> f64 {
        let t = libm::fabs(t);
        if t <= 0.5 {
            return 1.0;
        }
        if t >= 1.0 {
            return 0.0;
        }
        let u = 2.0 * t - 1.0;
        let rising = self.psi(u);
        let falling = self.psi(1.0 - u);
        // rising + falling > 0 on (0, 1)
        1.0 - rising / (rising + falling)
    }

    fn psi(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else {
            libm::exp(-self.transition_sharpness / u)
        }
    }
}

/// Filter values `H(|ℓ|/n)` for `|ℓ| < n` and the normalizer `ℏ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    n: usize,
    // index ℓ + n − 1
    weights: Vec<f64>,
    hbar: f64,
}

impl KernelWeights {
    pub fn new(filter: &LowPassFilter, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDegree(n));
        }
        let weights: Vec<f64> = (0..2 * n - 1)
            .map(|i| {
                let ell = i as f64 - (n - 1) as f64;
                filter.evaluate(libm::fabs(ell) / n as f64)
            })
            .collect();
        // the ℓ = 0 weight is 1, so the sum is at least 1
        let total: f64 = weights.iter().sum();
        Ok(Self {
            n,
            weights,
            hbar: 1.0 / total,
        })
    }

    /// Kernel degree `n`; indices run over `|ℓ| < n`.
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Weights ordered by ℓ = −(n−1), …, n−1.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, ell: isize) -> f64 {
        let idx = ell + self.n as isize - 1;
        if idx < 0 || idx as usize >= self.weights.len() {
            0.0
        } else {
            self.weights[idx as usize]
        }
    }

    /// Iterator over `(ℓ, H(|ℓ|/n))`.
    pub fn iter(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let offset = self.n as isize - 1;
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (i as isize - offset, w))
    }

    /// Φ_n(x) by direct summation.
    pub fn phi(&self, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (ell, w) in self.iter() {
            let t = ell as f64 * x;
            acc += Complex64::new(libm::cos(t), libm::sin(t)) * w;
        }
        acc * self.hbar
    }

    /// Φ_n′(x) = ℏ_n Σ iℓ H(|ℓ|/n) e^{iℓx}.
    pub fn phi_derivative(&self, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (ell, w) in self.iter() {
            let t = ell as f64 * x;
            acc += Complex64::new(-libm::sin(t), libm::cos(t)) * (w * ell as f64);
        }
        acc * self.hbar
    }
}
