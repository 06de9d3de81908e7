//! Helpers for angles on the circle 𝕋 = ℝ / 2πℤ.

use core::f64::consts::{PI, TAU};

/// Reduces `x` to the half-open interval (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let y = x - TAU * libm::floor((x + PI) / TAU);
    // y ∈ [−π, π) up to round-off
    if y <= -PI {
        y + TAU
    } else if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Distance between two angles measured along the circle, in [0, π].
pub fn circular_distance(a: f64, b: f64) -> f64 {
    libm::fabs(wrap_angle(a - b))
}

/// True when `x` already lies in (−π, π].
pub fn in_principal_range(x: f64) -> bool {
    x > -PI && x <= PI
}
