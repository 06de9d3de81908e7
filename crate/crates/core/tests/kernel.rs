use expsep_core::filter::{KernelWeights, LowPassFilter};
use expsep_core::spectrum::{default_grid_size, kernel_derivative_profile, kernel_profile, kernel_tail_sup};
use proptest::prelude::*;

fn weights(n: usize) -> KernelWeights {
    KernelWeights::new(&LowPassFilter::default(), n).unwrap()
}

#[test]
fn phi_is_one_at_origin_for_powers_of_two() {
    for k in 0..=12 {
        let n = 1usize << k;
        let w = weights(n);
        assert!((w.phi(0.0).re - 1.0).abs() <= 1e-12, "n = {n}");
    }
}

#[test]
fn grid_profile_matches_direct_summation() {
    let n = 64;
    let w = weights(n);
    let size = default_grid_size(n);
    let profile = kernel_profile(&w, size).unwrap();
    for j in (0..size).step_by(37) {
        let x = -std::f64::consts::PI + std::f64::consts::TAU * j as f64 / size as f64;
        assert!((profile[j] - w.phi(x)).norm() < 1e-12);
    }
    let deriv = kernel_derivative_profile(&w, size).unwrap();
    for j in (0..size).step_by(53) {
        let x = -std::f64::consts::PI + std::f64::consts::TAU * j as f64 / size as f64;
        assert!((deriv[j] - w.phi_derivative(x)).norm() < 1e-10);
    }
}

#[test]
fn bernstein_inequality_on_grid() {
    for n in [16usize, 128, 1024] {
        let w = weights(n);
        let size = default_grid_size(n);
        assert!(size >= 8 * n);
        let phi_max = kernel_profile(&w, size).unwrap().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let deriv_max = kernel_derivative_profile(&w, size)
            .unwrap()
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert!(deriv_max <= n as f64 * phi_max, "n = {n}: {deriv_max} > {}", n as f64 * phi_max);
    }
    let w = weights(128);
    let deriv_max = kernel_derivative_profile(&w, 8192)
        .unwrap()
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    assert!(deriv_max <= 128.0);
}

#[test]
fn localization_decays_at_least_cubically() {
    let sups: Vec<f64> = [64usize, 128, 256, 512]
        .iter()
        .map(|&n| kernel_tail_sup(&weights(n), 0.25, 64 * n).unwrap())
        .collect();
    for pair in sups.windows(2) {
        assert!(pair[0] / pair[1] >= 8.0, "decay {:?}", sups);
    }
}

#[test]
fn tail_at_quarter_for_n_256() {
    let sup = kernel_tail_sup(&weights(256), 0.25, 64 * 256).unwrap();
    assert!(sup <= 1e-4, "{sup}");
}

// Composite Simpson on [−1, 1]; the transition is smooth so 2·10⁵ panels is
// far below the 0.01 tolerance.
fn integral_of_filter(h: &LowPassFilter) -> f64 {
    let panels = 200_000;
    let step = 2.0 / panels as f64;
    let mut acc = h.evaluate(-1.0) + h.evaluate(1.0);
    for i in 1..panels {
        let t = -1.0 + i as f64 * step;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * h.evaluate(t);
    }
    acc * step / 3.0
}

#[test]
fn normalizer_approaches_filter_integral() {
    let h = LowPassFilter::default();
    let integral = integral_of_filter(&h);
    // the transition is antisymmetric about t = 3/4, so ∫H = 3/2
    assert!((integral - 1.5).abs() < 1e-9);
    let w = KernelWeights::new(&h, 4096).unwrap();
    assert!((1.0 / (w.hbar() * 4096.0) - integral).abs() <= 0.01);
}

proptest! {
    #[test]
    fn filter_is_even_and_bounded(t in -3.0f64..3.0, a in 0.2f64..4.0) {
        let h = LowPassFilter::new(a).unwrap();
        let v = h.evaluate(t);
        prop_assert_eq!(v, h.evaluate(-t));
        prop_assert!((0.0..=1.0).contains(&v));
        if t.abs() <= 0.5 { prop_assert_eq!(v, 1.0); }
        if t.abs() >= 1.0 { prop_assert_eq!(v, 0.0); }
    }

    #[test]
    fn kernel_weights_invariants(n in 1usize..2000) {
        let w = weights(n);
        prop_assert_eq!(w.weights().len(), 2 * n - 1);
        let total: f64 = w.weights().iter().sum();
        prop_assert!((w.hbar() * total - 1.0).abs() <= 1e-12);
        prop_assert!(w.hbar() >= 1.0 / (2 * n - 1) as f64 - 1e-15);
        prop_assert!(w.hbar() <= 1.0 / n as f64 + 1e-15);
        let ws = w.weights();
        for i in 0..ws.len() {
            prop_assert_eq!(ws[i], ws[ws.len() - 1 - i]);
        }
    }

    #[test]
    fn phi_is_even_and_real(x in -3.2f64..3.2, k in 0u32..10) {
        let w = weights(1 << k);
        let a = w.phi(x);
        let b = w.phi(-x);
        prop_assert!((a - b).norm() <= 1e-12);
        prop_assert!(a.im.abs() <= 1e-12);
    }
}
