use super::state::{outer_asymptotic_defect, FlowState, FLOW_INNER, PINNED_NODES};
use crate::error::{Error, Result};
use crate::geometry::{curvature_with, CurvatureFields, WarpedMetric};

/// Rates of the deviations `a - 1` and `b/r - 1` under `∂_t g = -2 Rc`,
/// i.e. `∂_t a = -a Rc_rad` and `∂_t b = -b Rc_sph`. The pinned outer nodes
/// get zero.
pub fn ricci_flow_rhs(state: &FlowState) -> Result<(Vec<f64>, Vec<f64>)> {
    check_blowup(state.curvature.sup_riem(), state)?;
    Ok(rhs_from(&state.metric, &state.curvature))
}

fn rhs_from(metric: &WarpedMetric, curv: &CurvatureFields) -> (Vec<f64>, Vec<f64>) {
    let n = metric.len();
    let live = n.saturating_sub(PINNED_NODES);
    let mut da = vec![0.0; n];
    let mut db = vec![0.0; n];
    for i in 0..live {
        da[i] = -metric.a()[i] * curv.rc_rad[i];
        db[i] = -(1.0 + metric.beta()[i]) * curv.rc_sph[i];
    }
    (da, db)
}

fn rhs_of(metric: &WarpedMetric) -> Result<(Vec<f64>, Vec<f64>)> {
    let curv = curvature_with(metric, FLOW_INNER)?;
    Ok(rhs_from(metric, &curv))
}

fn check_blowup(sup: f64, state: &FlowState) -> Result<()> {
    let threshold = state.limits.blowup_threshold;
    if !sup.is_finite() || sup > threshold {
        return Err(Error::CurvatureBlowUp { sup_rm: sup, threshold, t: state.time });
    }
    Ok(())
}

/// Explicit parabolic time step `safety · min_i (a Δr)^2 / (2n)`.
pub fn cfl_dt(state: &FlowState, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidArgument(format!("CFL safety {safety} must lie in (0, 1]")));
    }
    Ok(safety * cfl_limit(&state.metric)?)
}

/// `min_i (a Δr)^2 / (2n)` for a metric.
pub fn cfl_limit(metric: &WarpedMetric) -> Result<f64> {
    let r = metric.grid().radii();
    let a = metric.a();
    let mut best = f64::INFINITY;
    for i in 0..r.len() - 1 {
        let ds = a[i].min(a[i + 1]) * (r[i + 1] - r[i]);
        if !(ds > 0.0) {
            return Err(Error::DegenerateGrid { index: i });
        }
        best = best.min(ds * ds);
    }
    Ok(best / (2.0 * metric.dim() as f64))
}

/// One classical Runge–Kutta step of the Ricci flow.
pub fn step(state: &FlowState, dt: f64) -> Result<FlowState> {
    let limit = cfl_limit(&state.metric)?;
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::StabilityViolated { dt, limit });
    }
    let metric = &state.metric;
    let (a0, b0) = (metric.alpha(), metric.beta());
    let stage = |ka: &[f64], kb: &[f64], h: f64| -> Result<WarpedMetric> {
        let a = a0.iter().zip(ka).map(|(v, k)| v + h * k).collect();
        let b = b0.iter().zip(kb).map(|(v, k)| v + h * k).collect();
        metric.with_deviations(a, b)
    };
    let (k1a, k1b) = ricci_flow_rhs(state)?;
    let (k2a, k2b) = rhs_of(&stage(&k1a, &k1b, 0.5 * dt)?)?;
    let (k3a, k3b) = rhs_of(&stage(&k2a, &k2b, 0.5 * dt)?)?;
    let (k4a, k4b) = rhs_of(&stage(&k3a, &k3b, dt)?)?;
    let combine = |y: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
        (0..y.len()).map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
    };
    let mut a = combine(a0, &k1a, &k2a, &k3a, &k4a);
    let mut b = combine(b0, &k1b, &k2b, &k3b, &k4b);
    state.anchor.apply(metric.grid().radii(), &mut a, &mut b);
    let next = state.successor(metric.with_deviations(a, b)?, dt)?;
    check_blowup(next.curvature.sup_riem(), &next)?;
    let defect = outer_asymptotic_defect(&next.metric);
    let limit = next.limits.asymptotic_limit();
    if !(defect <= limit) {
        return Err(Error::AsymptoticsViolated { value: defect, limit, t: next.time });
    }
    Ok(next)
}

/// Receives flow states at the recording cadence.
pub trait Observer {
    fn observe(&mut self, state: &FlowState) -> Result<()>;

    /// Called after every accepted step.
    fn on_step(&mut self, _before: &FlowState, _after: &FlowState, _dt: f64) -> Result<()> {
        Ok(())
    }
}

impl Observer for () {
    fn observe(&mut self, _state: &FlowState) -> Result<()> {
        Ok(())
    }
}

/// Run parameters of [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub t_final: f64,
    pub cfl_safety: f64,
    pub record_every: usize,
}

/// A run that stopped early, with the last good state.
#[derive(Debug)]
pub struct EvolveFailure {
    pub state: FlowState,
    pub error: Error,
}

impl std::fmt::Display for EvolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "flow stopped at t = {} after {} steps: {}", self.state.time, self.state.step_count, self.error)
    }
}

impl std::error::Error for EvolveFailure {}

/// Step with the CFL time step up to `t_final`, calling the observer at
/// the start, every `record_every` steps, and at the end.
pub fn evolve<O: Observer + ?Sized>(
    state: FlowState,
    options: &EvolveOptions,
    observer: &mut O,
) -> std::result::Result<FlowState, Box<EvolveFailure>> {
    let fail = |state: FlowState, error: Error| Box::new(EvolveFailure { state, error });
    if options.record_every == 0 {
        return Err(fail(state, Error::InvalidArgument("record_every must be >= 1".into())));
    }
    if !(options.t_final > state.time) {
        return Err(fail(state, Error::InvalidArgument("t_final must exceed the current time".into())));
    }
    if let Err(e) = observer.observe(&state) {
        return Err(fail(state, e));
    }
    let mut current = state;
    let mut since_record = 0usize;
    // Steps land on `t_final` exactly; the tolerance absorbs accumulated rounding.
    let eps = 1e-12 * options.t_final.max(1.0);
    while current.time < options.t_final - eps {
        let dt = match cfl_dt(&current, options.cfl_safety) {
            Ok(dt) => dt.min(options.t_final - current.time),
            Err(e) => return Err(fail(current, e)),
        };
        let next = match step(&current, dt) {
            Ok(next) => next,
            Err(e) => return Err(fail(current, e)),
        };
        if let Err(e) = observer.on_step(&current, &next, dt) {
            return Err(fail(next, e));
        }
        current = next;
        since_record += 1;
        let finished = current.time >= options.t_final - eps;
        if since_record == options.record_every || finished {
            since_record = 0;
            if let Err(e) = observer.observe(&current) {
                return Err(fail(current, e));
            }
        }
    }
    Ok(current)
}
