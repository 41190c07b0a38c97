use super::integrator::cfl_limit;
use super::state::{FlowState, FIT_NODES, FLOW_INNER, PINNED_NODES, SCALAR_INNER};
use crate::error::{Error, Result};
use crate::geometry::{laplacian, WarpedMetric};

/// A scalar solving `u_t = Δ^{g(t)} u` on the flow background.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatField {
    pub u: Vec<f64>,
    pub sigma: f64,
    initial_tail: Vec<f64>,
}

impl HeatField {
    pub fn new(u: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("decay exponent sigma = {sigma} must be positive")));
        }
        let start = u.len().saturating_sub(PINNED_NODES + FIT_NODES);
        let initial_tail = u[start..].to_vec();
        Ok(Self { u, sigma, initial_tail })
    }

    /// `(1 + (r/r_c)^{2σ})^{-1/2}`: equal to one near the core and `~ (r_c/r)^σ` far out.
    pub fn envelope(metric: &WarpedMetric, r_c: f64, sigma: f64) -> Result<Self> {
        let u = metric.grid().radii().iter().map(|r| (1.0 + (r / r_c).powf(2.0 * sigma)).powf(-0.5)).collect();
        Self::new(u, sigma)
    }

    pub fn sup(&self) -> f64 {
        self.u.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn inf(&self) -> f64 {
        self.u.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    fn pin(&self, r: &[f64], u: &mut [f64]) {
        let n = u.len();
        if n < PINNED_NODES + FIT_NODES || self.initial_tail.len() != PINNED_NODES + FIT_NODES {
            return;
        }
        let start = n - PINNED_NODES - FIT_NODES;
        let (mut num, mut den) = (0.0, 0.0);
        for i in start..n - PINNED_NODES {
            let w = r[i].powf(-self.sigma);
            num += (u[i] - self.initial_tail[i - start]) * w;
            den += w * w;
        }
        let amp = num / den;
        for i in n - PINNED_NODES..n {
            u[i] = self.initial_tail[i - start] + amp * r[i].powf(-self.sigma);
        }
    }
}

fn heat_rhs(metric: &WarpedMetric, u: &[f64]) -> Vec<f64> {
    let jets = metric.jets_with(FLOW_INNER);
    let mut du = laplacian(metric, &jets, u, SCALAR_INNER);
    let n = du.len();
    du[n.saturating_sub(PINNED_NODES)..].iter_mut().for_each(|v| *v = 0.0);
    du
}

/// One RK4 step of the heat equation on the metric of `state`, held fixed.
pub fn heat_step(field: &HeatField, state: &FlowState, dt: f64) -> Result<HeatField> {
    heat_step_between(field, state.metric(), state.metric(), dt)
}

/// One RK4 step with the background interpolated linearly in time from
/// `before` to `after`.
pub fn heat_step_between(field: &HeatField, before: &WarpedMetric, after: &WarpedMetric, dt: f64) -> Result<HeatField> {
    if !before.same_shape(after) || field.u.len() != before.len() {
        return Err(Error::MismatchedGrids);
    }
    let limit = cfl_limit(before)?.min(cfl_limit(after)?);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::StabilityViolated { dt, limit });
    }
    let mid = if before == after { before.clone() } else { midpoint(before, after)? };
    let u0 = &field.u;
    let shifted = |k: &[f64], h: f64| -> Vec<f64> { u0.iter().zip(k).map(|(u, k)| u + h * k).collect() };
    let k1 = heat_rhs(before, u0);
    let k2 = heat_rhs(&mid, &shifted(&k1, 0.5 * dt));
    let k3 = heat_rhs(&mid, &shifted(&k2, 0.5 * dt));
    let k4 = heat_rhs(after, &shifted(&k3, dt));
    let mut u: Vec<f64> =
        (0..u0.len()).map(|i| u0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
    field.pin(before.grid().radii(), &mut u);
    Ok(HeatField { u, sigma: field.sigma, initial_tail: field.initial_tail.clone() })
}

/// Metric with averaged samples.
pub fn midpoint(before: &WarpedMetric, after: &WarpedMetric) -> Result<WarpedMetric> {
    if !before.same_shape(after) {
        return Err(Error::MismatchedGrids);
    }
    let avg = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| 0.5 * (p + q)).collect();
    before.with_deviations(avg(before.alpha(), after.alpha()), avg(before.beta(), after.beta()))
}
