mod common;

use common::{planar_basis, spatial_basis, twelve_points};
use expsep_core::angle::{circular_distance, wrap_angle};
use expsep_core::filter::{KernelWeights, LowPassFilter};
use expsep_core::model::{PointSourceModel, SampleLine, Source};
use expsep_core::multidim::{
    assemble_estimates, assemble_full, fold_model, match_model, pair_estimates, plan_lines,
    recover_direction_pair, recover_from_lines, sample_budget, CoordinateTuple, DirectionBasis,
    DirectionalEstimate, DirectionalSource, LineScheme,
};
use expsep_core::recovery::RecoveryParams;
use expsep_core::scene::{generate_scene, SceneSpec};
use expsep_core::spectrum::default_grid_size;
use expsep_core::Complex64;
use proptest::prelude::*;

fn noiseless_run(
    model: &PointSourceModel,
    basis: &DirectionBasis,
    n: usize,
    params: &RecoveryParams,
    scheme: LineScheme,
) -> expsep_core::multidim::AssembledSources {
    let weights = KernelWeights::new(&LowPassFilter::default(), n).unwrap();
    let lines: Vec<_> = plan_lines(basis, n, scheme)
        .unwrap()
        .into_iter()
        .map(|p| {
            let s = SampleLine::exact(model, &p.line).unwrap();
            (p, s)
        })
        .collect();
    recover_from_lines(&lines, basis, &weights, params, default_grid_size(n)).unwrap()
}

#[test]
fn twelve_point_accurate_coordinates() {
    let model = twelve_points();
    let basis = planar_basis();
    let n = 1024;
    let size = default_grid_size(n);
    let weights = KernelWeights::new(&LowPassFilter::default(), n).unwrap();
    let plan = &plan_lines(&basis, n, LineScheme::Anchored).unwrap()[0];
    let samples = SampleLine::exact(&model, &plan.line).unwrap();
    let est = recover_direction_pair(&samples, &weights, &RecoveryParams::new(50.0, 0.08).unwrap(), size, 0, 1).unwrap();
    assert_eq!(est.sources.len(), 12);
    let mut truth: Vec<f64> = model
        .projections(basis.row(0))
        .unwrap()
        .into_iter()
        .map(wrap_angle)
        .collect();
    truth.sort_by(f64::total_cmp);
    for (s, t) in est.sources.iter().zip(&truth) {
        assert!(circular_distance(s.accurate, *t) <= std::f64::consts::TAU / size as f64);
    }
}

#[test]
fn twelve_point_noiseless_assembly() {
    let model = twelve_points();
    let basis = planar_basis();
    let folded = fold_model(&model, &basis).unwrap();
    let out = noiseless_run(&model, &basis, 1024, &RecoveryParams::new(50.0, 0.02).unwrap(), LineScheme::Anchored);
    assert_eq!(out.k_hat(), 12);
    assert_eq!(out.unpaired, 0);
    assert!(out.points.iter().all(|p| p.pairing_distance <= 0.05), "{:?}", out.diagnostics);
    let report = match_model(&folded, &out, 0.05).unwrap();
    assert_eq!(report.matched, 12);
    for &(t, e, _) in &report.pairs {
        let w = &folded.sources()[t].frequency;
        for (a, b) in w.iter().zip(&out.points[e].w) {
            assert!((a - b).abs() <= 1e-3);
        }
    }
}

#[test]
fn all_pairs_scheme_matches_anchored() {
    let model = twelve_points();
    let basis = planar_basis();
    let params = RecoveryParams::new(50.0, 0.02).unwrap();
    let a = noiseless_run(&model, &basis, 512, &params, LineScheme::Anchored);
    let b = noiseless_run(&model, &basis, 512, &params, LineScheme::AllPairs);
    assert_eq!(a.points, b.points);
}

#[test]
fn coarse_coordinate_from_phase() {
    let basis = planar_basis();
    let n = 512;
    let size = default_grid_size(n);
    let weights = KernelWeights::new(&LowPassFilter::default(), n).unwrap();
    let plan = &plan_lines(&basis, n, LineScheme::Anchored).unwrap()[0];
    let w = vec![0.1, 0.2];
    let coarse_truth = wrap_angle(basis.project(&w)[1]);
    for phi in [0.0, 0.7] {
        let model = PointSourceModel::new(2, vec![Source::new(Complex64::from_polar(2.0, phi), w.clone())]).unwrap();
        let samples = SampleLine::exact(&model, &plan.line).unwrap();
        let est = recover_direction_pair(&samples, &weights, &RecoveryParams::new(2.0, 1.0).unwrap(), size, 0, 1).unwrap();
        let coarse = est.sources[0].coarse;
        // a complex amplitude shifts the phase readout by exactly −φ
        assert!(circular_distance(coarse, wrap_angle(coarse_truth - phi)) <= 0.05);
    }
}

#[test]
fn spatial_budget_and_recovery() {
    let basis = spatial_basis();
    let n = 300;
    let plans = plan_lines(&basis, n, LineScheme::Anchored).unwrap();
    assert_eq!(plans.len(), 3);
    assert_eq!(sample_budget(&plans), 6 * n - 3);
    let floor = 8.0 * std::f64::consts::PI / n as f64;
    let scene = generate_scene(&SceneSpec::new(10, floor), &basis, 4).unwrap();
    let out = noiseless_run(&scene, &basis, n, &RecoveryParams::new(1.0, floor).unwrap(), LineScheme::Anchored);
    let report = match_model(&scene, &out, 1e-3).unwrap();
    assert_eq!(report.matched, 10);
}

#[test]
fn assembly_is_equivariant_under_row_permutation() {
    let basis = spatial_basis();
    let rows = basis.rows().to_vec();
    let permuted = DirectionBasis::new(vec![rows[2].clone(), rows[0].clone(), rows[1].clone()]).unwrap();
    let tuples = vec![
        CoordinateTuple { coords: vec![0.3, -1.2, 2.0], amp: 1.0, pairing_distance: 0.0 },
        CoordinateTuple { coords: vec![-2.5, 0.1, 0.9], amp: 2.0, pairing_distance: 0.0 },
    ];
    let perm: Vec<CoordinateTuple> = tuples
        .iter()
        .map(|t| CoordinateTuple { coords: vec![t.coords[2], t.coords[0], t.coords[1]], ..t.clone() })
        .collect();
    let a = assemble_full(&tuples, &basis).unwrap();
    let b = assemble_full(&perm, &permuted).unwrap();
    for (p, q) in a.points.iter().zip(&b.points) {
        for (x, y) in p.w.iter().zip(&q.w) {
            assert!((x - y).abs() <= 1e-9);
        }
    }
}

#[test]
fn assemble_requires_anchor() {
    let basis = planar_basis();
    let est = DirectionalEstimate { accurate_dir: 1, coarse_dir: 0, sources: vec![] };
    assert!(assemble_estimates(&[est], &basis).is_err());
}

fn brute_force_cost(a: &DirectionalEstimate, b: &DirectionalEstimate) -> (f64, Vec<usize>) {
    fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, out);
            items.swap(k, i);
        }
    }
    let mut perms = Vec::new();
    permute(&mut (0..b.sources.len()).collect(), 0, &mut perms);
    let dist = |i: usize, j: usize| {
        let d1 = circular_distance(a.sources[i].accurate, b.sources[j].coarse);
        let d2 = circular_distance(a.sources[i].coarse, b.sources[j].accurate);
        (d1 * d1 + d2 * d2).sqrt()
    };
    perms
        .into_iter()
        .map(|p| ((0..a.sources.len()).map(|i| dist(i, p[i])).sum::<f64>(), p))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn greedy_pairing_equals_optimal_assignment(k in 1usize..=6, seed in any::<u64>()) {
        let basis = DirectionBasis::identity(2).unwrap();
        let n = 256;
        let floor = 8.0 * std::f64::consts::PI / n as f64;
        let scene = generate_scene(&SceneSpec::new(k, floor), &basis, seed).unwrap();
        let weights = KernelWeights::new(&LowPassFilter::default(), n).unwrap();
        let size = default_grid_size(n);
        let params = RecoveryParams::new(1.0, floor).unwrap();
        let plans = plan_lines(&basis, n, LineScheme::Anchored).unwrap();
        let ests: Vec<DirectionalEstimate> = plans
            .iter()
            .map(|p| {
                let s = SampleLine::exact(&scene, &p.line).unwrap();
                recover_direction_pair(&s, &weights, &params, size, p.accurate_dir, p.coarse_dir).unwrap()
            })
            .collect();
        prop_assert_eq!(ests[0].sources.len(), k);
        prop_assert_eq!(ests[1].sources.len(), k);
        let greedy = pair_estimates(&ests[0], &ests[1]).unwrap();
        let (_, best) = brute_force_cost(&ests[0], &ests[1]);
        for p in &greedy.pairs {
            prop_assert_eq!(best[p.a_index], p.b_index);
        }
    }

    #[test]
    fn noiseless_end_to_end_is_grid_accurate(k in 1usize..=5, seed in any::<u64>()) {
        let basis = planar_basis();
        let n = 256;
        let floor = 8.0 * std::f64::consts::PI / n as f64;
        let scene = generate_scene(&SceneSpec::new(k, floor), &basis, seed).unwrap();
        let out = noiseless_run(&scene, &basis, n, &RecoveryParams::new(1.0, floor).unwrap(), LineScheme::Anchored);
        prop_assert_eq!(out.k_hat(), k);
        let tol = basis.inverse_norm() * (2.0f64).sqrt() * 4.0 * std::f64::consts::PI / default_grid_size(n) as f64;
        let report = match_model(&scene, &out, 10.0 * tol).unwrap();
        prop_assert_eq!(report.matched, k);
        for &(t, e, _) in &report.pairs {
            for (a, b) in scene.sources()[t].frequency.iter().zip(&out.points[e].w) {
                prop_assert!((a - b).abs() <= tol, "{} vs {} (tol {})", a, b, tol);
            }
        }
    }

    #[test]
    fn banded_pairing_equals_full_sort(
        a in proptest::collection::vec((-3.1f64..3.1, -3.1f64..3.1), 1..60),
        b in proptest::collection::vec((-3.1f64..3.1, -3.1f64..3.1), 1..60),
        coarse_b in any::<bool>(),
    ) {
        let est = |v: &[(f64, f64)], acc, coarse| DirectionalEstimate {
            accurate_dir: acc,
            coarse_dir: coarse,
            sources: v.iter().map(|&(x, y)| DirectionalSource { accurate: x, coarse: y, amp: 1.0 }).collect(),
        };
        let ea = est(&a, 0, 1);
        // either both coordinates shared, or only direction 0
        let eb = if coarse_b { est(&b, 1, 0) } else { est(&b, 2, 0) };
        let got = pair_estimates(&ea, &eb).unwrap();

        let dist = |i: usize, j: usize| {
            let d0 = circular_distance(a[i].0, b[j].1);
            if coarse_b {
                let d1 = circular_distance(a[i].1, b[j].0);
                (d0 * d0 + d1 * d1).sqrt()
            } else {
                d0
            }
        };
        let mut all: Vec<(f64, usize, usize)> = (0..a.len())
            .flat_map(|i| (0..b.len()).map(move |j| (i, j)))
            .map(|(i, j)| (dist(i, j), i, j))
            .collect();
        all.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let (mut ua, mut ub) = (vec![false; a.len()], vec![false; b.len()]);
        let mut want = Vec::new();
        for (_, i, j) in all {
            if !ua[i] && !ub[j] {
                ua[i] = true;
                ub[j] = true;
                want.push((i, j));
            }
        }
        want.sort();
        let have: Vec<(usize, usize)> = got.pairs.iter().map(|p| (p.a_index, p.b_index)).collect();
        prop_assert_eq!(have, want);
        prop_assert_eq!(got.pairs.len(), a.len().min(b.len()));
    }
}
