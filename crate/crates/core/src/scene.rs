//! Seeded synthetic point clouds.
//!
//! Scenes are drawn so the pipeline can see them: every projection
//! `⟨Δ_d, w_k⟩` lies in `(−π + margin, π − margin)` and, per direction, the
//! projections of any two sources are at least `separation_floor` apart on
//! the circle. Amplitudes are real and positive.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angle::circular_distance;
use crate::error::{Error, Result};
use crate::model::{PointSourceModel, Source};
use crate::multidim::DirectionBasis;

/// Where points are drawn uniformly before rejection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SceneBox {
    /// Uniform in the projection coordinates `Δw`.
    Projections,
    /// Uniform in `[−h, h]^q` for the frequencies themselves.
    Frequencies(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub count: usize,
    pub amplitude_range: (f64, f64),
    pub separation_floor: f64,
    pub margin: f64,
    pub domain: SceneBox,
    /// Draws allowed per requested point before giving up.
    pub attempts_per_point: usize,
}

impl SceneSpec {
    pub fn new(count: usize, separation_floor: f64) -> Self {
        Self {
            count,
            amplitude_range: (1.0, 1.0),
            separation_floor,
            margin: 0.1,
            domain: SceneBox::Projections,
            attempts_per_point: 1000,
        }
    }
}

/// Draws a scene for `basis` from the seeded stream `seed`.
pub fn generate_scene(spec: &SceneSpec, basis: &DirectionBasis, seed: u64) -> Result<PointSourceModel> {
    let (lo, hi) = spec.amplitude_range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidParameter("amplitude range must satisfy 0 < lo <= hi"));
    }
    if spec.count == 0 {
        return Err(Error::InvalidParameter("scene needs at least one point"));
    }
    if !(spec.margin >= 0.0 && spec.margin < PI) || !(spec.separation_floor >= 0.0) {
        return Err(Error::InvalidParameter("margin must lie in [0, π) and floor be nonnegative"));
    }
    let q = basis.dim();
    let limit = PI - spec.margin;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut projections: Vec<Vec<f64>> = Vec::with_capacity(spec.count);
    let mut sources = Vec::with_capacity(spec.count);
    let budget = spec.attempts_per_point.max(1) * spec.count;
    let mut attempts = 0;
    while sources.len() < spec.count {
        if attempts == budget {
            return Err(Error::InvalidParameter("scene constraints could not be met"));
        }
        attempts += 1;
        let (w, b) = match spec.domain {
            SceneBox::Projections => {
                let b: Vec<f64> = (0..q).map(|_| rng.random_range(-limit..limit)).collect();
                (basis.solve(&b)?, b)
            }
            SceneBox::Frequencies(h) => {
                if !(h > 0.0) {
                    return Err(Error::InvalidParameter("frequency box must be positive"));
                }
                let w: Vec<f64> = (0..q).map(|_| rng.random_range(-h..h)).collect();
                let b = basis.project(&w);
                if b.iter().any(|v| v.abs() >= limit) {
                    continue;
                }
                (w, b)
            }
        };
        let separated = projections.iter().all(|p| {
            p.iter()
                .zip(&b)
                .all(|(x, y)| circular_distance(*x, *y) >= spec.separation_floor)
        });
        if !separated {
            continue;
        }
        let amp = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        projections.push(b);
        sources.push(Source::new(Complex64::new(amp, 0.0), w));
    }
    PointSourceModel::new(q, sources)
}
