//! Recovery of multidimensional exponential sums with localized
//! trigonometric kernels.
//!
//! Given noisy equispaced samples of
//!
//! ```text
//! f(x) = Σ_k A_k exp(-i⟨x, w_k⟩),   w_k ∈ ℝ^q
//! ```
//!
//! along a handful of lines in frequency space, this crate recovers the
//! number of components `K`, their frequencies `w_k` and amplitudes `|A_k|`
//! using `O(qn)` samples. The univariate core filters the samples with a
//! smooth low-pass filter, evaluates the resulting trigonometric polynomial
//! on a fine grid and reads the sources off the peaks above a fixed
//! threshold. Multivariate problems reduce to a few univariate ones whose
//! coordinates are paired through the phase of the spectrum at the peaks.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. All numerical kernels are pure functions of their inputs; every
//! random draw comes from a seeded ChaCha stream.
//!
//! ## Example
//!
//! ```rust
//! use expsep_core::filter::{KernelWeights, LowPassFilter};
//! use expsep_core::model::{PointSourceModel, SampleLine, SamplingLine, Source};
//! use expsep_core::recovery::{estimate_sources, RecoveryParams};
//! use expsep_core::spectrum::{default_grid_size, eval_sigma_grid};
//! use num_complex::Complex64;
//!
//! let model = PointSourceModel::new(1, vec![
//!     Source::new(Complex64::new(1.0, 0.0), vec![-3.0]),
//!     Source::new(Complex64::new(-2.0, 0.0), vec![-1.0]),
//!     Source::new(Complex64::new(3.0, 0.0), vec![2.0]),
//! ]).unwrap();
//! let n = 256;
//! let line = SamplingLine::univariate(n);
//! let samples = SampleLine::exact(&model, &line).unwrap();
//! let weights = KernelWeights::new(&LowPassFilter::default(), n).unwrap();
//! let grid = eval_sigma_grid(&samples, &weights, default_grid_size(n)).unwrap();
//! let found = estimate_sources(&grid, &RecoveryParams::new(1.0, 2.0).unwrap());
//! assert_eq!(found.len(), 3);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod angle;
pub mod baselines;
pub mod error;
mod fft;
pub mod filter;
pub mod model;
pub mod multidim;
pub mod recovery;
pub mod scene;
pub mod seed;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
