use std::sync::Arc;

use rfmass::diagnostics::{adm_mass, decay_fit_window};
use rfmass::geometry::{curvature_of, RadialGrid};
use rfmass::initialdata::{build, convergent_family, family_limit, InitialDataSpec, InitialKind};
use rfmass::Error;

fn grid(nodes: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::compactified(nodes, 1.0, 1e4, 30.0).unwrap())
}

#[test]
fn constructors_reject_bad_input() {
    let g = grid(256);
    assert!(matches!(build(&InitialDataSpec::flat(2), g.clone()), Err(Error::UnsupportedDimension(2))));
    assert!(matches!(build(&InitialDataSpec::flat(7), g.clone()), Err(Error::UnsupportedDimension(7))));
    assert!(build(&InitialDataSpec::schwarzschild(3, f64::NAN), g.clone()).is_err());
    assert!(matches!(
        build(&InitialDataSpec::conformal_bump(3, -3.0, None), g.clone()),
        Err(Error::AmplitudeTooLarge(_))
    ));
    assert!(build(&InitialDataSpec::flat(3).with_gamma(0), g).is_err());
}

#[test]
fn every_kind_builds_in_every_dimension() {
    let g = grid(256);
    for n in 3..=6 {
        for spec in [
            InitialDataSpec::flat(n),
            InitialDataSpec::schwarzschild(n, 1.0),
            InitialDataSpec::conformal_bump(n, 0.5, Some(n as f64 + 2.0)),
            InitialDataSpec::perturbed_flat(n, 0.05, 1.0, 7),
        ] {
            let m = build(&spec, g.clone()).unwrap();
            assert_eq!(m.dim(), n);
            assert!(m.a().iter().all(|&a| a > 0.0));
            assert!(m.b().windows(2).all(|w| w[1] > w[0]), "{spec:?}");
        }
    }
}

#[test]
fn deviations_decay_at_the_declared_rate() {
    let g = grid(2048);
    for spec in [
        InitialDataSpec::schwarzschild(3, 1.0),
        InitialDataSpec::schwarzschild(4, 1.0),
        InitialDataSpec::conformal_bump(3, 0.5, Some(5.0)),
        InitialDataSpec::conformal_bump(3, 0.5, Some(3.5)),
        InitialDataSpec::perturbed_flat(3, 0.05, 0.7, 1),
    ] {
        let m = build(&spec, g.clone()).unwrap();
        let fit = decay_fit_window(&g, m.alpha(), 100.0, 1000.0).unwrap();
        let tau = m.profile().tau;
        assert!((fit.exponent - tau).abs() < 0.05, "{spec:?}: {} vs {tau}", fit.exponent);
    }
}

#[test]
fn schwarzschild_is_flat_inside_the_gluing_radius() {
    let g = grid(1024);
    let m = build(&InitialDataSpec::schwarzschild(3, 1.0), g.clone()).unwrap();
    let r = g.radii();
    for i in 0..g.len() {
        if r[i] <= 4.0 {
            assert_eq!(m.alpha()[i], 0.0);
        }
        assert_eq!(m.beta()[i], 0.0);
    }
    let c = curvature_of(&m).unwrap();
    let outer = g.nearest_node(20.0);
    assert!(c.scalar[outer..].iter().all(|s| s.abs() < 1e-9));
}

#[test]
fn perturbations_are_seeded() {
    let g = grid(512);
    let a = build(&InitialDataSpec::perturbed_flat(3, 0.05, 1.0, 42), g.clone()).unwrap();
    let b = build(&InitialDataSpec::perturbed_flat(3, 0.05, 1.0, 42), g.clone()).unwrap();
    let c = build(&InitialDataSpec::perturbed_flat(3, 0.05, 1.0, 43), g).unwrap();
    assert_eq!(a.alpha(), b.alpha());
    assert_eq!(a.beta(), b.beta());
    assert_ne!(a.alpha(), c.alpha());
}

#[test]
fn expected_mass_matches_the_measured_mass() {
    let g = grid(2048);
    for spec in [
        InitialDataSpec::flat(3),
        InitialDataSpec::schwarzschild(3, 0.7),
        InitialDataSpec::conformal_bump(3, 0.5, Some(5.0)),
        InitialDataSpec::conformal_bump(3, 0.5, None).with_gamma(2),
        InitialDataSpec::schwarzschild(3, 1.0).with_gamma(3),
    ] {
        let expected = spec.expected_mass().unwrap();
        let m = adm_mass(&build(&spec, g.clone()).unwrap()).unwrap();
        assert!((m.extrapolated - expected).abs() < 1e-4 * expected.max(1.0), "{spec:?}: {}", m.extrapolated);
    }
    assert_eq!(InitialDataSpec::perturbed_flat(3, 0.1, 1.0, 0).expected_mass(), None);
}

#[test]
fn family_members_approach_the_limit() {
    let g = grid(512);
    let base =
        InitialDataSpec { kind: InitialKind::ConvergentFamilyMember, ..InitialDataSpec::conformal_bump(3, 0.4, None) };
    let limit = family_limit(&base, g.clone()).unwrap();
    let gap = |k| {
        let m = convergent_family(&base, k, g.clone()).unwrap();
        m.alpha().iter().zip(limit.alpha()).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
    };
    let (g0, g4) = (gap(0), gap(4));
    assert!(g0 > 0.0 && g4 < 0.1 * g0);
}

#[test]
fn spec_round_trips_through_json() {
    let spec = InitialDataSpec::perturbed_flat(4, 0.02, 1.5, 9).with_gamma(2);
    let text = serde_json::to_string(&spec).unwrap();
    assert_eq!(serde_json::from_str::<InitialDataSpec>(&text).unwrap(), spec);
    let legacy: InitialDataSpec =
        serde_json::from_str(r#"{"kind":"schwarzschild_slice","n":3,"mass_parameter":2.0}"#).unwrap();
    assert_eq!(legacy, InitialDataSpec::schwarzschild(3, 2.0));
}
