//! Ground-truth exponential models, sampling lines and calibrated noise.
//!
//! A [`PointSourceModel`] holds `K` sources `(A_k, w_k)` with `w_k ∈ ℝ^q`.
//! Samples are taken along an affine line `offset + ℓ·direction`,
//! `|ℓ| < n`, in frequency space:
//!
//! ```text
//! μ̂(ℓ) = Σ_k A_k exp(−i⟨offset, w_k⟩) exp(−iℓ⟨direction, w_k⟩)
//! ```
//!
//! Frequencies are stored as given (unwrapped); reduction to the circle
//! happens only when a line is turned into a univariate problem.

use alloc::vec::Vec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::angle::{circular_distance, wrap_angle};
use crate::error::{Error, Result};

/// One component `A e^{−i⟨x, w⟩}` of an exponential sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub amplitude: Complex64,
    pub frequency: Vec<f64>,
}

impl Source {
    pub fn new(amplitude: Complex64, frequency: Vec<f64>) -> Self {
        Self {
            amplitude,
            frequency,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSourceModel {
    dim: usize,
    sources: Vec<Source>,
}

impl PointSourceModel {
    pub fn new(dim: usize, sources: Vec<Source>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidModel("dimension must be at least 1"));
        }
        if sources.is_empty() {
            return Err(Error::InvalidModel("a model needs at least one source"));
        }
        for s in &sources {
            if s.frequency.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.frequency.len(),
                });
            }
            if !(s.amplitude.norm() > 0.0) || !s.amplitude.is_finite() {
                return Err(Error::InvalidModel("amplitudes must be finite and nonzero"));
            }
            if s.frequency.iter().any(|w| !w.is_finite()) {
                return Err(Error::InvalidModel("frequencies must be finite"));
            }
        }
        Ok(Self { dim, sources })
    }

    /// Univariate model from `(amplitude, λ)` pairs.
    pub fn univariate(pairs: &[(Complex64, f64)]) -> Result<Self> {
        Self::new(
            1,
            pairs
                .iter()
                .map(|&(a, lambda)| Source::new(a, alloc::vec![lambda]))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    /// Number of sources `K`.
    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// `M = Σ |A_k|`.
    pub fn total_mass(&self) -> f64 {
        self.sources.iter().map(|s| s.amplitude.norm()).sum()
    }

    /// `𝔪 = min |A_k|`.
    pub fn min_amplitude(&self) -> f64 {
        self.sources
            .iter()
            .map(|s| s.amplitude.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Unwrapped inner products `⟨v, w_k⟩`.
    pub fn projections(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(self.sources.iter().map(|s| dot(v, &s.frequency)).collect())
    }

    /// The univariate model seen along `line`: amplitudes
    /// `A_k e^{−i⟨offset, w_k⟩}` at frequencies `⟨direction, w_k⟩` reduced to
    /// (−π, π].
    pub fn along_line(&self, line: &SamplingLine) -> Result<Self> {
        let offsets = self.projections(line.offset())?;
        let freqs = self.projections(line.direction())?;
        let sources = self
            .sources
            .iter()
            .zip(offsets.iter().zip(&freqs))
            .map(|(s, (&o, &f))| Source::new(s.amplitude * cis(-o), alloc::vec![wrap_angle(f)]))
            .collect();
        Self::new(1, sources)
    }

    /// Minimal circular separation `η` of the frequencies of a univariate
    /// model. A single source has separation 2π.
    pub fn min_separation(&self) -> Result<f64> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: self.dim,
            });
        }
        let mut eta = core::f64::consts::TAU;
        for (i, a) in self.sources.iter().enumerate() {
            for b in &self.sources[i + 1..] {
                eta = eta.min(circular_distance(a.frequency[0], b.frequency[0]));
            }
        }
        Ok(eta)
    }

    /// Concatenates the sources of two models of equal dimension.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut sources = self.sources.clone();
        sources.extend(other.sources.iter().cloned());
        Self::new(self.dim, sources)
    }
}

/// The affine line `offset + ℓ·direction`, `|ℓ| < n`, along which samples are
/// collected.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingLine {
    offset: Vec<f64>,
    direction: Vec<f64>,
    n: usize,
}

impl SamplingLine {
    pub fn new(offset: Vec<f64>, direction: Vec<f64>, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDegree(n));
        }
        if offset.len() != direction.len() {
            return Err(Error::DimensionMismatch {
                expected: direction.len(),
                found: offset.len(),
            });
        }
        if direction.is_empty() || direction.iter().all(|&d| d == 0.0) {
            return Err(Error::InvalidParameter("line direction must be nonzero"));
        }
        if offset.iter().chain(&direction).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("line coordinates must be finite"));
        }
        Ok(Self {
            offset,
            direction,
            n,
        })
    }

    /// The plain univariate line: offset 0, direction 1.
    pub fn univariate(n: usize) -> Self {
        Self {
            offset: alloc::vec![0.0],
            direction: alloc::vec![1.0],
            n: n.max(1),
        }
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    /// `2n − 1`.
    pub fn sample_count(&self) -> usize {
        2 * self.n - 1
    }

    /// Sample indices ℓ = −(n−1), …, n−1.
    pub fn indices(&self) -> impl Iterator<Item = isize> {
        let m = self.n as isize - 1;
        -m..=m
    }
}

/// Samples `μ̃(ℓ)` collected along one line.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleLine {
    line: SamplingLine,
    values: Vec<Complex64>,
    noise_sigma: f64,
}

impl SampleLine {
    pub fn new(line: SamplingLine, values: Vec<Complex64>, noise_sigma: f64) -> Result<Self> {
        if values.len() != line.sample_count() {
            return Err(Error::DimensionMismatch {
                expected: line.sample_count(),
                found: values.len(),
            });
        }
        if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
            return Err(Error::InvalidSigma(noise_sigma));
        }
        Ok(Self {
            line,
            values,
            noise_sigma,
        })
    }

    /// Noise-free samples of `model` along `line`.
    pub fn exact(model: &PointSourceModel, line: &SamplingLine) -> Result<Self> {
        let values = exact_moments(model, line)?;
        Self::new(line.clone(), values, 0.0)
    }

    /// Samples of `model` along `line` with noise drawn according to `spec`.
    pub fn noisy(model: &PointSourceModel, line: &SamplingLine, spec: &NoiseSpec) -> Result<Self> {
        let exact = exact_moments(model, line)?;
        let sigma = spec.resolve_sigma(&exact)?;
        let values = add_noise_with_sigma(&exact, spec.family, sigma, spec.seed);
        Self::new(line.clone(), values, sigma)
    }

    pub fn line(&self) -> &SamplingLine {
        &self.line
    }

    /// Values ordered by ℓ = −(n−1), …, n−1.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn degree(&self) -> usize {
        self.line.degree()
    }

    /// Multiplies every sample by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            line: self.line.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            noise_sigma: self.noise_sigma * factor.norm(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn cis(theta: f64) -> Complex64 {
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

// Powers of a unit phasor drift by about one ulp per multiplication;
// re-anchoring from exact trig every RESEED steps bounds the drift.
const RESEED: usize = 64;

/// Exact moments `μ̂(ℓ)`, `|ℓ| < n`, of `model` along `line`.
pub fn exact_moments(model: &PointSourceModel, line: &SamplingLine) -> Result<Vec<Complex64>> {
    if model.dim() != line.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: line.dim(),
        });
    }
    let count = line.sample_count();
    let first = -(line.degree() as f64 - 1.0);
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); count];
    for s in model.sources() {
        let theta = dot(line.direction(), &s.frequency);
        let base = s.amplitude * cis(-dot(line.offset(), &s.frequency));
        let step = cis(-theta);
        let mut phasor = Complex64::new(0.0, 0.0);
        for (i, slot) in out.iter_mut().enumerate() {
            if i % RESEED == 0 {
                phasor = cis(-(first + i as f64) * theta);
            } else {
                phasor *= step;
            }
            *slot += base * phasor;
        }
    }
    Ok(out)
}

/// Mean signal power `P = mean_ℓ |μ̂(ℓ)|²`.
pub fn signal_power(moments: &[Complex64]) -> f64 {
    if moments.is_empty() {
        return 0.0;
    }
    moments.iter().map(|m| m.norm_sqr()).sum::<f64>() / moments.len() as f64
}

/// Noise parameter `V` realizing `snr_db` against the mean sample power.
///
/// Complex noise with independent `N(0, V²)` parts has `E|ε|² = 2V²`, so
/// `V = sqrt(P / (2·10^{snr/10}))`.
pub fn calibrate_sigma(moments: &[Complex64], snr_db: f64) -> Result<f64> {
    if snr_db.is_nan() {
        return Err(Error::InvalidParameter("SNR must not be NaN"));
    }
    let power = signal_power(moments);
    if !(power > 0.0) {
        return Err(Error::ZeroSignal);
    }
    Ok(libm::sqrt(power / (2.0 * libm::pow(10.0, snr_db / 10.0))))
}

/// Sub-Gaussian noise families. Both have per-part variance `V²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseFamily {
    /// Independent `N(0, V²)` real and imaginary parts.
    ComplexGaussian,
    /// Independent real and imaginary parts uniform on `[−√3·V, √3·V]`.
    BoundedUniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    SnrDb(f64),
    Sigma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub level: NoiseLevel,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian_snr(snr_db: f64, seed: u64) -> Self {
        Self {
            family: NoiseFamily::ComplexGaussian,
            level: NoiseLevel::SnrDb(snr_db),
            seed,
        }
    }

    pub fn gaussian_sigma(sigma: f64, seed: u64) -> Self {
        Self {
            family: NoiseFamily::ComplexGaussian,
            level: NoiseLevel::Sigma(sigma),
            seed,
        }
    }

    /// The same spec with another seed.
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// The parameter `V` this spec implies for the given exact samples.
    pub fn resolve_sigma(&self, moments: &[Complex64]) -> Result<f64> {
        match self.level {
            NoiseLevel::SnrDb(snr) => calibrate_sigma(moments, snr),
            NoiseLevel::Sigma(v) if v >= 0.0 && v.is_finite() => Ok(v),
            NoiseLevel::Sigma(v) => Err(Error::InvalidSigma(v)),
        }
    }
}

/// `μ̂(ℓ) + ε_ℓ` with i.i.d. noise drawn from `spec`; deterministic in the
/// seed.
pub fn add_noise(moments: &[Complex64], spec: &NoiseSpec) -> Result<Vec<Complex64>> {
    let sigma = spec.resolve_sigma(moments)?;
    Ok(add_noise_with_sigma(moments, spec.family, sigma, spec.seed))
}

/// `count` i.i.d. draws of complex noise with parameter `sigma`.
pub fn draw_noise(count: usize, family: NoiseFamily, sigma: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match family {
        NoiseFamily::ComplexGaussian => (0..count)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * sigma, im * sigma)
            })
            .collect(),
        NoiseFamily::BoundedUniform => {
            let half_width = libm::sqrt(3.0) * sigma;
            if half_width == 0.0 {
                return alloc::vec![Complex64::new(0.0, 0.0); count];
            }
            let dist = Uniform::new_inclusive(-half_width, half_width)
                .expect("finite nonzero range");
            (0..count)
                .map(|_| Complex64::new(dist.sample(&mut rng), dist.sample(&mut rng)))
                .collect()
        }
    }
}

fn add_noise_with_sigma(
    moments: &[Complex64],
    family: NoiseFamily,
    sigma: f64,
    seed: u64,
) -> Vec<Complex64> {
    if sigma == 0.0 {
        return moments.to_vec();
    }
    moments
        .iter()
        .zip(draw_noise(moments.len(), family, sigma, seed))
        .map(|(m, e)| m + e)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn table_model() -> PointSourceModel {
        PointSourceModel::univariate(&[
            (Complex64::new(1.0, 0.0), -3.0),
            (Complex64::new(-2.0, 0.0), -1.0),
            (Complex64::new(3.0, 0.0), 2.0),
        ])
        .unwrap()
    }

    #[test]
    fn moments_of_three_source_model() {
        let model = table_model();
        let line = SamplingLine::univariate(4);
        let m = exact_moments(&model, &line).unwrap();
        assert_eq!(m.len(), 7);
        // ℓ = 0 sits at index n − 1
        assert!((m[3] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let expected = cis(3.0) - cis(1.0) * 2.0 + cis(-2.0) * 3.0;
        assert!((m[4] - expected).norm() < 1e-14);
    }

    #[test]
    fn moments_stay_accurate_over_long_lines() {
        let model = table_model();
        let n = 3000;
        let m = exact_moments(&model, &SamplingLine::univariate(n)).unwrap();
        for (i, v) in m.iter().enumerate().step_by(97) {
            let ell = i as f64 - (n - 1) as f64;
            let direct = cis(3.0 * ell) - cis(ell) * 2.0 + cis(-2.0 * ell) * 3.0;
            assert!((v - direct).norm() < 1e-11);
        }
    }

    #[test]
    fn single_zero_frequency_is_constant() {
        for q in 1..4 {
            let model = PointSourceModel::new(q, vec![Source::new(Complex64::new(1.0, 0.0), vec![0.0; q])]).unwrap();
            let line = SamplingLine::new(vec![0.3; q], vec![1.1; q], 5).unwrap();
            for v in exact_moments(&model, &line).unwrap() {
                assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let model = table_model();
        let line = SamplingLine::new(vec![0.0, 0.0], vec![1.0, 0.0], 4).unwrap();
        assert_eq!(
            exact_moments(&model, &line),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        );
    }

    #[test]
    fn model_validation() {
        assert!(PointSourceModel::new(1, vec![]).is_err());
        assert!(PointSourceModel::univariate(&[(Complex64::new(0.0, 0.0), 1.0)]).is_err());
        assert!(PointSourceModel::new(2, vec![Source::new(Complex64::new(1.0, 0.0), vec![1.0])]).is_err());
        let m = table_model();
        assert_eq!(m.total_mass(), 6.0);
        assert_eq!(m.min_amplitude(), 1.0);
        // −3 and 2 are 2π − 5 apart on the circle
        assert!((m.min_separation().unwrap() - (core::f64::consts::TAU - 5.0)).abs() < 1e-12);
        assert!(SamplingLine::new(vec![0.0], vec![0.0], 3).is_err());
        assert!(SamplingLine::new(vec![0.0], vec![1.0], 0).is_err());
    }

    #[test]
    fn calibration_examples() {
        // P = 2 at 0 dB gives V = 1
        let two = vec![Complex64::new(1.0, 1.0); 8];
        assert!((calibrate_sigma(&two, 0.0).unwrap() - 1.0).abs() < 1e-15);
        // P = 1 at −10 dB gives V = √5
        let one = vec![Complex64::new(0.0, 1.0); 8];
        assert!((calibrate_sigma(&one, -10.0).unwrap() - 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(calibrate_sigma(&one, f64::INFINITY).unwrap(), 0.0);
        assert!(calibrate_sigma(&one, 200.0).unwrap() < 1e-9);
        assert_eq!(calibrate_sigma(&[Complex64::new(0.0, 0.0); 3], 0.0), Err(Error::ZeroSignal));
    }

    #[test]
    fn zero_sigma_is_identity_and_seed_is_deterministic() {
        let m = exact_moments(&table_model(), &SamplingLine::univariate(16)).unwrap();
        assert_eq!(add_noise(&m, &NoiseSpec::gaussian_sigma(0.0, 9)).unwrap(), m);
        let a = add_noise(&m, &NoiseSpec::gaussian_snr(-5.0, 9)).unwrap();
        let b = add_noise(&m, &NoiseSpec::gaussian_snr(-5.0, 9)).unwrap();
        assert_eq!(a, b);
        let c = add_noise(&m, &NoiseSpec::gaussian_snr(-5.0, 10)).unwrap();
        assert_ne!(a, c);
        assert_eq!(
            add_noise(&m, &NoiseSpec::gaussian_sigma(-1.0, 9)),
            Err(Error::InvalidSigma(-1.0))
        );
    }

    #[test]
    fn gaussian_noise_second_moment() {
        let e = draw_noise(100_000, NoiseFamily::ComplexGaussian, 1.0, 3);
        let p = signal_power(&e);
        assert!((1.9..=2.1).contains(&p), "E|ε|² = {p}");
        let u = draw_noise(100_000, NoiseFamily::BoundedUniform, 1.0, 3);
        let p = signal_power(&u);
        assert!((1.9..=2.1).contains(&p), "E|ε|² = {p}");
        assert!(u.iter().all(|z| z.re.abs() <= 3f64.sqrt() && z.im.abs() <= 3f64.sqrt()));
    }

    #[test]
    fn along_line_wraps_and_rotates() {
        let model = PointSourceModel::new(2, vec![Source::new(Complex64::new(2.0, 0.0), vec![1.0, 1.0])]).unwrap();
        let line = SamplingLine::new(vec![0.5, 0.0], vec![2.0, 2.0], 8).unwrap();
        let uni = model.along_line(&line).unwrap();
        let s = &uni.sources()[0];
        assert!((s.frequency[0] - wrap_angle(4.0)).abs() < 1e-15);
        assert!((s.amplitude - cis(-0.5) * 2.0).norm() < 1e-15);
        // samples along the line equal the univariate model's moments
        let direct = exact_moments(&model, &line).unwrap();
        let via = exact_moments(&uni, &SamplingLine::univariate(8)).unwrap();
        for (a, b) in direct.iter().zip(&via) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
