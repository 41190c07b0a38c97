use serde::{Deserialize, Serialize};

use super::decay::{decay_fit_window, DecayFit};
use super::integrals::FitWindow;
use crate::error::{Error, Result};
use crate::flow::{FlowState, PINNED_NODES};
use crate::geometry::{point_curvature, InnerBoundary, PointJet, RadialPair, WarpedMetric};

/// Radii below `MASS_DENSITY_REGIME × r_min` are not asymptotic enough for
/// the divergence identity.
pub const MASS_DENSITY_REGIME: f64 = 10.0;
/// First node of the annulus used for truncated global integrals.
pub const ANNULUS_INNER_NODE: usize = 8;
/// Outer radius of that annulus as a fraction of `r_max`.
pub const ANNULUS_OUTER_FRACTION: f64 = 0.1;

fn divergence_defect(n: usize, jet: &PointJet) -> f64 {
    let pair = RadialPair::from_jet(jet);
    let f = pair.mass_density(n, jet.r);
    let div = pair.mass_density_r(n, jet.r) + (n as f64 - 1.0) * f / jet.r;
    point_curvature(n, jet).scalar - div
}

/// `R(g) - ∂_j(∂_i g_ij - ∂_j g_ii)` at radius `r`. For the radial mass
/// density `F x/r` the divergence is `F' + (n-1)F/r`.
pub fn mass_density_residual(metric: &WarpedMetric, r: f64) -> Result<f64> {
    let min = MASS_DENSITY_REGIME * metric.grid().r_min();
    if !(r >= min) {
        return Err(Error::OutsideAsymptoticRegime { r, min });
    }
    let jet = metric.jets().interpolate(metric.grid(), r)?;
    Ok(divergence_defect(metric.dim(), &jet))
}

/// Nodal divergence-identity residual; zero below the asymptotic regime.
pub fn mass_density_profile(metric: &WarpedMetric) -> Vec<f64> {
    let min = MASS_DENSITY_REGIME * metric.grid().r_min();
    let jets = metric.jets();
    (0..jets.len()).map(|i| if jets.r[i] >= min { divergence_defect(metric.dim(), &jets.at(i)) } else { 0.0 }).collect()
}

/// Decay fit of the divergence-identity residual over `window`.
pub fn mass_density_decay(metric: &WarpedMetric, window: FitWindow) -> Result<DecayFit> {
    decay_fit_window(metric.grid(), &mass_density_profile(metric), window.lo, window.hi)
}

/// Truncated integrals entering `d/dt ∫R dv = ∫(2|Rc|^2 - R^2) dv` on an
/// annulus, together with the boundary flux `∮ ∂_ν R` the truncation adds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TotalScalarSample {
    pub t: f64,
    pub scalar: f64,
    pub ricci_sq: f64,
    pub scalar_sq: f64,
    pub boundary_flux: f64,
}

impl TotalScalarSample {
    pub fn source(&self) -> f64 {
        2.0 * self.ricci_sq - self.scalar_sq + self.boundary_flux
    }
}

/// Node range `[lo, hi]` of the default annulus.
pub fn default_annulus(metric: &WarpedMetric) -> (usize, usize) {
    let grid = metric.grid();
    let hi = grid.nearest_node(ANNULUS_OUTER_FRACTION * grid.r_max()).min(grid.len().saturating_sub(PINNED_NODES + 1));
    (ANNULUS_INNER_NODE.min(hi), hi)
}

pub fn total_scalar_sample(state: &FlowState) -> Result<TotalScalarSample> {
    total_scalar_sample_on(state, default_annulus(state.metric()))
}

pub fn total_scalar_sample_on(state: &FlowState, (lo, hi): (usize, usize)) -> Result<TotalScalarSample> {
    let metric = state.metric();
    if !(lo < hi && hi < metric.len()) {
        return Err(Error::InvalidArgument(format!("annulus nodes [{lo}, {hi}] invalid for {} nodes", metric.len())));
    }
    let n = metric.dim();
    let grid = metric.grid();
    let curv = state.curvature();
    let dv = metric.volume_density();
    let rc2 = curv.ricci_norm_sq(n);
    let weighted = |f: &dyn Fn(usize) -> f64| {
        let vals: Vec<f64> = (0..metric.len()).map(|i| f(i) * dv[i]).collect();
        grid.integrate_nodes(&vals, lo, hi)
    };
    let (r_r, _) = grid.radial_derivatives(&curv.scalar, InnerBoundary::OneSided);
    let area = metric.unit_cross_section();
    let flux_at = |i: usize| area * metric.b()[i].powi(n as i32 - 1) * r_r[i] / metric.a()[i];
    Ok(TotalScalarSample {
        t: state.time(),
        scalar: weighted(&|i| curv.scalar[i]),
        ricci_sq: weighted(&|i| rc2[i]),
        scalar_sq: weighted(&|i| curv.scalar[i] * curv.scalar[i]),
        boundary_flux: flux_at(hi) - flux_at(lo),
    })
}

/// Derivative at `t` of the quadratic through three `(t_k, y_k)` samples.
pub fn quadratic_derivative(samples: [(f64, f64); 3], t: f64) -> f64 {
    let [(t0, y0), (t1, y1), (t2, y2)] = samples;
    // the weights sum to zero, so only differences enter and constants give exactly 0
    (y0 - y1) * ((t - t1) + (t - t2)) / ((t0 - t1) * (t0 - t2))
        + (y2 - y1) * ((t - t0) + (t - t1)) / ((t2 - t0) * (t2 - t1))
}

/// `dy/dt - source` at every sample, with `dy/dt` from the quadratic through
/// three neighbouring samples: centered inside, one-sided at the two ends.
pub fn rate_profile(t: &[f64], y: &[f64], source: &[f64]) -> Result<Vec<f64>> {
    let len = t.len();
    if y.len() != len || source.len() != len {
        return Err(Error::InvalidArgument("sample arrays differ in length".into()));
    }
    if len < 3 {
        return Err(Error::WindowTooShort { len, min: 3 });
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("sample times must increase".into()));
    }
    let at = |k: usize, lo: usize| {
        let s = [(t[lo], y[lo]), (t[lo + 1], y[lo + 1]), (t[lo + 2], y[lo + 2])];
        quadratic_derivative(s, t[k]) - source[k]
    };
    Ok((0..len).map(|k| at(k, k.saturating_sub(1).min(len - 3))).collect())
}

fn columns(window: &[TotalScalarSample]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (
        window.iter().map(|w| w.t).collect(),
        window.iter().map(|w| w.scalar).collect(),
        window.iter().map(|w| w.source()).collect(),
    )
}

/// Centered three-point `d/dt ∫R dv` minus its source at every interior
/// sample of the window.
pub fn total_scalar_rate_residual(window: &[TotalScalarSample]) -> Result<Vec<f64>> {
    let profile = total_scalar_rate_profile(window)?;
    Ok(profile[1..profile.len() - 1].to_vec())
}

/// Residual at every sample: centered inside, one-sided at the two ends.
pub fn total_scalar_rate_profile(window: &[TotalScalarSample]) -> Result<Vec<f64>> {
    let (t, y, s) = columns(window);
    rate_profile(&t, &y, &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, scalar: f64, source: f64) -> TotalScalarSample {
        TotalScalarSample { t, scalar, ricci_sq: source / 2.0, scalar_sq: 0.0, boundary_flux: 0.0 }
    }

    #[test]
    fn centered_rate_is_exact_for_quadratics() {
        let f = |t: f64| 1.0 + 2.0 * t - 3.0 * t * t;
        let ts = [0.1, 0.13, 0.2];
        let w: Vec<_> = ts.iter().map(|&t| sample(t, f(t), 2.0 - 6.0 * t)).collect();
        let res = total_scalar_rate_residual(&w).unwrap();
        assert_eq!(res.len(), 1);
        assert!(res[0].abs() < 1e-12);
    }

    #[test]
    fn one_sided_ends_are_exact_for_quadratics() {
        let f = |t: f64| 4.0 - t + 0.5 * t * t;
        let ts = [0.0, 0.1, 0.25, 0.3];
        let w: Vec<_> = ts.iter().map(|&t| sample(t, f(t), t - 1.0)).collect();
        let res = total_scalar_rate_profile(&w).unwrap();
        assert_eq!(res.len(), 4);
        assert!(res.iter().all(|v| v.abs() < 1e-12), "{res:?}");
    }

    #[test]
    fn short_window_is_rejected() {
        let w = [sample(0.0, 0.0, 0.0), sample(1.0, 0.0, 0.0)];
        assert!(matches!(total_scalar_rate_residual(&w), Err(Error::WindowTooShort { len: 2, min: 3 })));
    }
}
