use std::sync::Arc;

use rfmass::flow::{
    cfl_dt, cfl_limit, evolve, heat_step, ricci_flow_rhs, scalar_evolution_residual, step, EvolveOptions, FlowState,
    HeatField, Observer, PINNED_NODES, SCALAR_INNER,
};
use rfmass::geometry::{brute_force_curvature, gradient_norm_sq, RadialGrid, WarpedMetric};
use rfmass::initialdata::{build, InitialDataSpec};
use rfmass::io::{read_checkpoint, write_checkpoint};
use rfmass::Error;

fn grid(nodes: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::compactified(nodes, 1.0, 1e4, 30.0).unwrap())
}

fn state(spec: &InitialDataSpec, nodes: usize) -> FlowState {
    FlowState::new(build(spec, grid(nodes)).unwrap(), 1e3).unwrap()
}

fn bump() -> InitialDataSpec {
    InitialDataSpec::conformal_bump(3, 0.5, Some(5.0))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn flat_space_and_its_quotient_are_fixed_points() {
    for spec in [InitialDataSpec::flat(3), InitialDataSpec::flat(3).with_gamma(2), InitialDataSpec::flat(5)] {
        let s = state(&spec, 512);
        let (da, db) = ricci_flow_rhs(&s).unwrap();
        assert!(max_abs(&da) == 0.0 && max_abs(&db) == 0.0);
        let dt = cfl_dt(&s, 1.0).unwrap();
        let next = step(&s, dt).unwrap();
        assert_eq!(next.metric().a(), s.metric().a());
        assert_eq!(next.metric().b(), s.metric().b());
        assert_eq!(next.time(), dt);
        assert!(matches!(step(&s, 2.0 * dt), Err(Error::StabilityViolated { .. })));
    }
}

#[test]
fn schwarzschild_rate_matches_the_oracle_ricci_curvature() {
    let g = grid(2048);
    let s = FlowState::new(build(&InitialDataSpec::schwarzschild(3, 1.0), g.clone()).unwrap(), 1e3).unwrap();
    let (_, db) = ricci_flow_rhs(&s).unwrap();
    assert!(max_abs(&db) > 0.0);
    let i = g.nearest_node(10.0);
    let r = g.radii()[i];
    let oracle = brute_force_curvature(s.metric(), r).unwrap();
    // d(b/r)/dt = -(b/r) Rc_sph, with b = r here
    assert!(oracle.rc_sph > 0.0 && db[i] < 0.0);
    assert!((db[i] + oracle.rc_sph).abs() < 1e-6 * oracle.rc_sph, "{} vs {}", db[i], -oracle.rc_sph);
}

#[test]
fn cfl_step_follows_the_parabolic_formula() {
    // proper spacing 0.1 on flat space: dt = 0.1^2 / (2n)
    let g = Arc::new(RadialGrid::uniform(9991, 1.0, 1000.0).unwrap());
    let m = WarpedMetric::flat(3, g, 1, 1.0).unwrap();
    let s = FlowState::new(m, 1e3).unwrap();
    let dt = cfl_dt(&s, 1.0).unwrap();
    assert!((dt / (0.01 / 6.0) - 1.0).abs() < 1e-9, "{dt}");
    let fine = Arc::new(RadialGrid::uniform(19981, 1.0, 1000.0).unwrap());
    let s2 = FlowState::new(WarpedMetric::flat(3, fine, 1, 1.0).unwrap(), 1e3).unwrap();
    assert!((cfl_dt(&s2, 1.0).unwrap() / dt - 0.25).abs() < 1e-12);
    assert!(matches!(cfl_dt(&s, 1.5), Err(Error::InvalidArgument(_))));
}

#[test]
fn cfl_limit_is_the_minimum_over_nodes() {
    let s = state(&InitialDataSpec::schwarzschild(3, 1.0), 1024);
    let m = s.metric();
    let (r, a) = (m.grid().radii(), m.a());
    let brute =
        (0..r.len() - 1).map(|i| (a[i].min(a[i + 1]) * (r[i + 1] - r[i])).powi(2) / 6.0).fold(f64::INFINITY, f64::min);
    assert_eq!(cfl_limit(m).unwrap(), brute);
}

#[test]
fn scalar_curvature_stays_nonnegative_after_one_step() {
    // the glued slice has R(0) = 0 only up to discretization error
    let min = |v: &[f64]| v.iter().fold(f64::INFINITY, |m: f64, &x| m.min(x));
    let mut floors = Vec::new();
    for nodes in [1024, 2048] {
        let s = state(&InitialDataSpec::schwarzschild(3, 1.0), nodes);
        let dt = cfl_dt(&s, 0.5).unwrap();
        let next = step(&s, dt).unwrap();
        let (r0, r1) = (min(&s.curvature().scalar).min(0.0), min(&next.curvature().scalar));
        assert!(r1 >= r0, "N = {nodes}: {r1:e} < {r0:e}");
        floors.push(r1);
    }
    assert!(floors[1] > -1e-9 && floors[1] > 100.0 * floors[0], "{floors:?}");
}

#[test]
fn runge_kutta_local_error_is_fifth_order() {
    let s = state(&bump(), 512);
    let dt0 = cfl_dt(&s, 1.0).unwrap();
    let defect = |dt: f64| {
        let full = step(&s, dt).unwrap();
        let half = step(&step(&s, 0.5 * dt).unwrap(), 0.5 * dt).unwrap();
        max_diff(full.metric().alpha(), half.metric().alpha()).max(max_diff(full.metric().beta(), half.metric().beta()))
    };
    let (e1, e2) = (defect(dt0), defect(0.5 * dt0));
    let order = (e1 / e2).log2();
    assert!(order >= 3.8, "order {order:.2} from {e1:e} and {e2:e}");
}

#[test]
fn scalar_evolution_residual_vanishes_on_flat_space_and_converges() {
    let flat = state(&InitialDataSpec::flat(3), 512);
    let dt = cfl_dt(&flat, 1.0).unwrap();
    let r = scalar_evolution_residual(&flat, &step(&flat, dt).unwrap(), dt).unwrap();
    assert_eq!(max_abs(&r), 0.0);

    // the bump's switch is resolved from about N = 2048 on
    for (spec, coarse) in [(InitialDataSpec::schwarzschild(3, 1.0), 512), (bump(), 2048)] {
        let res = |nodes: usize| {
            let s = state(&spec, nodes);
            let dt = cfl_dt(&s, 0.5).unwrap();
            let r = scalar_evolution_residual(&s, &step(&s, dt).unwrap(), dt).unwrap();
            let live = r.len() - PINNED_NODES;
            max_abs(&r[8..live])
        };
        let (c, f) = (res(coarse), res(2 * coarse));
        assert!(c / f >= 8.0, "{spec:?}: {c:e} -> {f:e}");
    }
}

#[test]
fn bump_scalar_residual_is_third_order_once_resolved() {
    let res = |nodes: usize| {
        let s = state(&bump(), nodes);
        let dt = cfl_dt(&s, 0.5).unwrap();
        let r = scalar_evolution_residual(&s, &step(&s, dt).unwrap(), dt).unwrap();
        max_abs(&r[8..r.len() - PINNED_NODES])
    };
    let e: Vec<f64> = [2048, 4096, 8192].into_iter().map(res).collect();
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 3.0, "{e:?}");
    }
}

#[test]
fn tight_threshold_forces_a_blow_up_with_the_last_good_state() {
    let s = FlowState::new(build(&bump(), grid(256)).unwrap(), 0.9999).unwrap();
    let options = EvolveOptions { t_final: 0.1, cfl_safety: 0.5, record_every: 10 };
    let failure = evolve(s, &options, &mut ()).unwrap_err();
    assert!(matches!(failure.error, Error::CurvatureBlowUp { .. }));
    assert_eq!(failure.state.time(), 0.0);
}

#[test]
fn bad_run_parameters_are_rejected() {
    let s = state(&bump(), 256);
    let zero = EvolveOptions { t_final: 0.1, cfl_safety: 0.5, record_every: 0 };
    assert!(matches!(evolve(s.clone(), &zero, &mut ()).unwrap_err().error, Error::InvalidArgument(_)));
    let past = EvolveOptions { t_final: 0.0, cfl_safety: 0.5, record_every: 1 };
    assert!(matches!(evolve(s, &past, &mut ()).unwrap_err().error, Error::InvalidArgument(_)));
    assert!(FlowState::new(build(&bump(), grid(256)).unwrap(), 0.0).is_err());
}

struct Times(Vec<(f64, u64)>);

impl Observer for Times {
    fn observe(&mut self, s: &FlowState) -> rfmass::Result<()> {
        self.0.push((s.time(), s.step_count()));
        Ok(())
    }
}

#[test]
fn evolve_lands_on_t_final_and_records_on_cadence() {
    let s = state(&bump(), 256);
    let mut times = Times(Vec::new());
    let options = EvolveOptions { t_final: 0.05, cfl_safety: 0.5, record_every: 7 };
    let end = evolve(s, &options, &mut times).unwrap();
    assert_eq!(end.time(), 0.05);
    assert_eq!(times.0.first(), Some(&(0.0, 0)));
    assert_eq!(times.0.last().unwrap().1, end.step_count());
    for w in times.0.windows(2).take(times.0.len() - 2) {
        assert_eq!(w[1].1 - w[0].1, 7);
    }
}

#[test]
fn restart_from_checkpoint_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mid.csv");
    let s = state(&bump(), 512);
    let opts = |t| EvolveOptions { t_final: t, cfl_safety: 0.5, record_every: 1000 };
    let mid = evolve(s, &opts(0.02), &mut ()).unwrap();
    write_checkpoint(&path, &mid).unwrap();
    let restored = read_checkpoint(&path).unwrap();
    let direct = evolve(mid, &opts(0.04), &mut ()).unwrap();
    let resumed = evolve(restored, &opts(0.04), &mut ()).unwrap();
    assert_eq!(direct.time(), resumed.time());
    assert_eq!(direct.step_count(), resumed.step_count());
    assert_eq!(direct.metric().alpha(), resumed.metric().alpha());
    assert_eq!(direct.metric().beta(), resumed.metric().beta());
    assert_eq!(direct.max_curv(), resumed.max_curv());
}

#[test]
fn heat_constant_is_stationary() {
    let s = state(&InitialDataSpec::flat(3), 512);
    let h = HeatField::new(vec![0.7; 512], 2.0).unwrap();
    let next = heat_step(&h, &s, cfl_dt(&s, 1.0).unwrap()).unwrap();
    assert!(next.u.iter().all(|&u| (u - 0.7).abs() < 1e-14));
}

#[test]
fn heat_envelope_keeps_its_decay_on_flat_space() {
    let s = state(&InitialDataSpec::flat(3), 1024);
    let m = s.metric();
    let g = m.grid();
    let mut h = HeatField::envelope(m, 4.0, 2.0).unwrap();
    let grad0 = gradient_norm_sq(m, &h.u, SCALAR_INNER).into_iter().fold(0.0, f64::max);
    let dt = cfl_dt(&s, 0.5).unwrap();
    let (mut t, mut sup) = (0.0, h.sup());
    while t < 1.0 {
        let d = dt.min(1.0 - t);
        h = heat_step(&h, &s, d).unwrap();
        t += d;
        assert!(h.sup() <= sup + 1e-15);
        sup = h.sup();
        let grad = gradient_norm_sq(m, &h.u, SCALAR_INNER).into_iter().fold(0.0, f64::max);
        assert!(grad <= grad0 * (1.0 + 1e-12));
    }
    let fit = rfmass::diagnostics::decay_fit_window(g, &h.u, 100.0, 1000.0).unwrap();
    assert!(fit.exponent >= 1.9, "{}", fit.exponent);
}
