use std::sync::Arc;

use proptest::prelude::*;
use rfmass::geometry::{
    brute_force_curvature, brute_force_curvature_with_step, curvature_of, to_cartesian_components, AsymptoticProfile,
    RadialGrid, WarpedMetric,
};
use rfmass::initialdata::{build, InitialDataSpec};

fn grid(nodes: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::compactified(nodes, 1.0, 1e4, 30.0).unwrap())
}

fn node_near(g: &RadialGrid, r: f64) -> (usize, f64) {
    let i = g.nearest_node(r);
    (i, g.radii()[i])
}

#[test]
fn flat_metric_has_no_curvature_anywhere() {
    let g = grid(1024);
    let m = build(&InitialDataSpec::flat(3), g).unwrap();
    let c = curvature_of(&m).unwrap();
    for f in [&c.k_rad, &c.k_sph, &c.rc_rad, &c.rc_sph, &c.scalar] {
        assert!(f.iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn schwarzschild_slice_at_ten() {
    let g = grid(2048);
    let m = build(&InitialDataSpec::schwarzschild(3, 1.0), g.clone()).unwrap();
    let c = curvature_of(&m).unwrap();
    let (i, r) = node_near(&g, 10.0);
    // positive: K_sph = (1 - b_s^2)/b^2 with b_s^2 = 1 - 2m/r
    assert!((c.k_sph[i] - 2.0 / r.powi(3)).abs() < 1e-9, "{}", c.k_sph[i]);
    assert!((c.k_rad[i] + 1.0 / r.powi(3)).abs() < 1e-9);
    assert!(c.scalar[i].abs() < 1e-9);
    let oracle = brute_force_curvature(&m, r).unwrap();
    assert!(c.at(i).relative_error(&oracle) < 1e-6);
    assert!((oracle.k_sph - 2.0 / r.powi(3)).abs() < 1e-8);
}

#[test]
fn oracle_self_consistency_over_two_steps() {
    let g = grid(2048);
    for (spec, r) in
        [(InitialDataSpec::schwarzschild(3, 1.0), 10.0), (InitialDataSpec::conformal_bump(3, 0.5, Some(5.0)), 8.0)]
    {
        let m = build(&spec, g.clone()).unwrap();
        let (i, r) = node_near(&g, r);
        let coarse = brute_force_curvature_with_step(&m, r, 0.02 * r).unwrap();
        let fine = brute_force_curvature_with_step(&m, r, 0.01 * r).unwrap();
        assert!(fine.relative_error(&coarse) < 1e-6, "{spec:?}");
        let nodal = curvature_of(&m).unwrap().at(i);
        assert!(nodal.relative_error(&brute_force_curvature(&m, r).unwrap()) < 1e-6, "{spec:?}");
    }
}

#[test]
fn oracle_agrees_on_random_perturbations() {
    let g = grid(4096);
    let m = build(&InitialDataSpec::perturbed_flat(3, 0.05, 1.0, 11), g.clone()).unwrap();
    let c = curvature_of(&m).unwrap();
    for r in [3.4, 4.0, 7.8, 33.0, 560.0] {
        let (i, r) = node_near(&g, r);
        let e = c.at(i).relative_error(&brute_force_curvature(&m, r).unwrap());
        assert!(e < 1e-6, "r = {r}: {e:e}");
    }
}

#[test]
fn cartesian_components_of_schwarzschild() {
    let g = grid(2048);
    let m = build(&InitialDataSpec::schwarzschild(3, 1.0), g.clone()).unwrap();
    let (_, r) = node_near(&g, 100.0);
    let c = to_cartesian_components(&m, &[1.0, 0.0, 0.0], r).unwrap();
    assert!((c.g(0, 0) - 1.0 / (1.0 - 2.0 / r)).abs() < 1e-9);
    assert!((c.g(0, 0) - 1.0204).abs() < 1e-3);
    assert!((c.g(1, 1) - 1.0).abs() < 1e-12);
    assert!(c.g(0, 1).abs() < 1e-12);
}

#[test]
fn zero_amplitude_bump_is_kronecker() {
    let g = grid(512);
    let m = build(&InitialDataSpec::conformal_bump(3, 0.0, Some(5.0)), g.clone()).unwrap();
    let (_, r) = node_near(&g, 50.0);
    let c = to_cartesian_components(&m, &[0.6, 0.0, 0.8], r).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(c.g(i, j), if i == j { 1.0 } else { 0.0 });
            for k in 0..3 {
                assert_eq!(c.dg(k, i, j), 0.0);
            }
        }
    }
}

#[test]
fn curvature_is_independent_of_the_compactification_scale() {
    let spec = InitialDataSpec::conformal_bump(3, 0.5, Some(5.0));
    let g30 = Arc::new(RadialGrid::compactified(2048, 1.0, 1e4, 30.0).unwrap());
    let g60 = Arc::new(RadialGrid::compactified(2048, 1.0, 1e4, 60.0).unwrap());
    let (c30, c60) = (
        curvature_of(&build(&spec, g30.clone()).unwrap()).unwrap(),
        curvature_of(&build(&spec, g60.clone()).unwrap()).unwrap(),
    );
    for r in [5.0, 20.0, 100.0, 500.0] {
        let (k30, _) = g30.interpolate(&c30.k_sph, r).unwrap();
        let (k60, _) = g60.interpolate(&c60.k_sph, r).unwrap();
        let (s30, _) = g30.interpolate(&c30.riem_norm, r).unwrap();
        assert!((k30 - k60).abs() < 1e-6 * s30, "r = {r}: {k30:e} vs {k60:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curvature_scales_inversely_with_length_squared(lambda in 0.5f64..4.0, amp in 0.1f64..0.8) {
        let g = grid(512);
        let m = build(&InitialDataSpec::conformal_bump(3, amp, Some(5.0)), g.clone()).unwrap();
        let gs = Arc::new(g.scaled(lambda).unwrap());
        let b: Vec<f64> = m.b().iter().map(|b| lambda * b).collect();
        let ms = WarpedMetric::new(3, gs, m.a().to_vec(), b, 1, AsymptoticProfile::new(1.0)).unwrap();
        let (c, cs) = (curvature_of(&m).unwrap(), curvature_of(&ms).unwrap());
        let scale = c.riem_norm.iter().fold(0.0f64, |a, &v| a.max(v));
        for i in 0..c.len() {
            prop_assert!((cs.k_rad[i] * lambda * lambda - c.k_rad[i]).abs() <= 1e-9 * scale);
            prop_assert!((cs.k_sph[i] * lambda * lambda - c.k_sph[i]).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn trace_identities_hold_at_every_node(amp in -0.5f64..0.8, n in 3usize..6) {
        let m = build(&InitialDataSpec::conformal_bump(n, amp, None), grid(256)).unwrap();
        let c = curvature_of(&m).unwrap();
        let nf = n as f64;
        for i in 0..c.len() {
            let rc = c.rc_rad[i] + (nf - 1.0) * c.rc_sph[i];
            prop_assert!((rc - c.scalar[i]).abs() <= 1e-12 * (1.0 + c.riem_norm[i]));
        }
    }
}
