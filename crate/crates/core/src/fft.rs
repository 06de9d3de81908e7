//! Iterative radix-2 FFT used for grid evaluation of trigonometric
//! polynomials. Lengths must be powers of two.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use num_complex::Complex64;

/// `buf[k] ← Σ_j buf[j] e^{+2πi jk/N}` (no 1/N factor).
pub(crate) fn inverse_in_place(buf: &mut [Complex64]) {
    radix2(buf, 1.0);
}

/// `buf[k] ← Σ_j buf[j] e^{−2πi jk/N}`.
pub(crate) fn forward_in_place(buf: &mut [Complex64]) {
    radix2(buf, -1.0);
}

fn radix2(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "FFT length {n} is not a power of two");
    if n <= 1 {
        return;
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }

    // twiddles computed directly (no recurrence) to keep round-off at one ulp
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| {
            let theta = sign * TAU * k as f64 / n as f64;
            Complex64::new(libm::cos(theta), libm::sin(theta))
        })
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}
