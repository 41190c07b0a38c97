use serde::{Deserialize, Serialize};

use super::mass::{mass_ladder, richardson};
use crate::error::{Error, Result};
use crate::flow::{midpoint, FlowState, FLOW_INNER};
use crate::geometry::{ball_volume, curvature_with, WarpedMetric};

/// Ratios `V(B_r) / (Ω_n r^n)` on the mass ladder and their limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeRatio {
    pub ladder: Vec<(f64, f64)>,
    pub extrapolated: f64,
    pub uncertainty: f64,
}

/// `V(B_r)` with the region inside `r_min` counted as a flat quotient ball.
///
/// The Euclidean part is integrated exactly and only `a b^{n-1} - r^{n-1}`
/// goes through the quadrature.
pub fn volume_ball(metric: &WarpedMetric, r: f64) -> Result<f64> {
    let n = metric.dim() as i32;
    let grid = metric.grid();
    let excess: Vec<f64> =
        (0..metric.len()).map(|i| grid.radii()[i].powi(n - 1) * relative_excess(metric, i)).collect();
    let dev = grid.integrate_to(&excess, r)?;
    Ok(metric.unit_cross_section() * (r.powi(n) / n as f64 + dev))
}

/// `a b^{n-1} / r^{n-1} - 1` at node `i`, from the stored deviations.
fn relative_excess(metric: &WarpedMetric, i: usize) -> f64 {
    let m = metric.dim() as f64 - 1.0;
    (metric.alpha()[i].ln_1p() + m * metric.beta()[i].ln_1p()).exp_m1()
}

/// `μ = lim V(B_r)/(Ω_n r^n)`, extrapolated with residual order `τ`.
pub fn asymptotic_volume_ratio(metric: &WarpedMetric) -> Result<VolumeRatio> {
    let n = metric.dim();
    let omega = ball_volume(n);
    let ladder = mass_ladder(metric.grid().r_max())
        .into_iter()
        .map(|r| volume_ball(metric, r).map(|v| (r, v / (omega * r.powi(n as i32)))))
        .collect::<Result<Vec<_>>>()?;
    let (extrapolated, uncertainty) = richardson(&ladder, metric.profile().tau);
    Ok(VolumeRatio { ladder, extrapolated, uncertainty })
}

/// `(V_after - V_before)/dt + ∫_{B_r} R dv`, with `R dv` on the midpoint metric.
pub fn volume_rate_residual(before: &FlowState, after: &FlowState, dt: f64, r: f64) -> Result<f64> {
    let (m0, m1) = (before.metric(), after.metric());
    if !m0.same_shape(m1) {
        return Err(Error::MismatchedGrids);
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
    }
    let n = m0.dim() as i32;
    let grid = m0.grid();
    let change: Vec<f64> = (0..m0.len())
        .map(|i| grid.radii()[i].powi(n - 1) * (relative_excess(m1, i) - relative_excess(m0, i)))
        .collect();
    let rate = m0.unit_cross_section() * grid.integrate_to(&change, r)? / dt;
    let mid = midpoint(m0, m1)?;
    let curv = curvature_with(&mid, FLOW_INNER)?;
    let density: Vec<f64> = (0..mid.len()).map(|i| curv.scalar[i] * mid.a()[i] * mid.b()[i].powi(n - 1)).collect();
    let total_r = mid.unit_cross_section() * grid.integrate_to(&density, r)?;
    Ok(rate + total_r)
}

/// `V(B_r)` and `∫_{B_r} R dv` at one flow time; along the flow
/// `dV/dt = -∫ R dv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeSample {
    pub t: f64,
    pub radius: f64,
    pub volume: f64,
    pub scalar_integral: f64,
}

pub fn volume_sample(state: &FlowState, r: f64) -> Result<VolumeSample> {
    let metric = state.metric();
    let n = metric.dim() as i32;
    let scalar = &state.curvature().scalar;
    let density: Vec<f64> = (0..metric.len()).map(|i| scalar[i] * metric.a()[i] * metric.b()[i].powi(n - 1)).collect();
    Ok(VolumeSample {
        t: state.time(),
        radius: r,
        volume: volume_ball(metric, r)?,
        scalar_integral: metric.unit_cross_section() * metric.grid().integrate_to(&density, r)?,
    })
}

/// `(dV/dt + ∫R dv) / V` at every sample of a series.
pub fn volume_rate_profile(window: &[VolumeSample]) -> Result<Vec<f64>> {
    let t: Vec<f64> = window.iter().map(|w| w.t).collect();
    let v: Vec<f64> = window.iter().map(|w| w.volume).collect();
    let s: Vec<f64> = window.iter().map(|w| -w.scalar_integral).collect();
    let res = super::residuals::rate_profile(&t, &v, &s)?;
    Ok(res.iter().zip(&v).map(|(r, v)| r / v).collect())
}
