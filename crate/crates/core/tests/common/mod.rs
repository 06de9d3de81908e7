#![allow(dead_code)]

use expsep_core::model::{PointSourceModel, Source};
use expsep_core::multidim::DirectionBasis;
use expsep_core::Complex64;

/// Three tones with amplitudes (1, −2, 3) at (−3, −1, 2).
pub fn three_tones() -> PointSourceModel {
    PointSourceModel::univariate(&[
        (Complex64::new(1.0, 0.0), -3.0),
        (Complex64::new(-2.0, 0.0), -1.0),
        (Complex64::new(3.0, 0.0), 2.0),
    ])
    .unwrap()
}

pub const TWELVE_POINTS: [(f64, f64); 12] = [
    (-1.2566, 0.6283),
    (-0.7540, 0.3142),
    (-0.2513, 1.2566),
    (-0.2513, 0.6283),
    (-0.2513, 0.0),
    (0.0, -0.6283),
    (0.0, -1.2566),
    (0.2513, 1.2566),
    (0.2513, 0.6283),
    (0.2513, 0.0),
    (0.7540, 0.3142),
    (1.2566, 0.6283),
];

/// Twelve planar points, all with amplitude 50.
pub fn twelve_points() -> PointSourceModel {
    PointSourceModel::new(
        2,
        TWELVE_POINTS
            .iter()
            .map(|&(a, b)| Source::new(Complex64::new(50.0, 0.0), vec![a, b]))
            .collect(),
    )
    .unwrap()
}

pub fn planar_basis() -> DirectionBasis {
    DirectionBasis::new(vec![vec![1.38, 4.14], vec![-7.56, 5.67]]).unwrap()
}

pub fn spatial_basis() -> DirectionBasis {
    DirectionBasis::new(vec![
        vec![-0.73, -0.16, -0.66],
        vec![0.11, -0.98, 0.11],
        vec![-2.10, 1.20, 3.29],
    ])
    .unwrap()
}
