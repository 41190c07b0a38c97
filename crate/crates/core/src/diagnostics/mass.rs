use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowState;
use crate::geometry::{to_cartesian_components, PointJet, RadialJets, RadialPair, WarpedMetric};

/// Number of ladder radii.
pub const LADDER_RUNGS: usize = 7;
/// Smallest ladder radius as a fraction of `r_max`.
pub const LADDER_BASE: f64 = 0.1;

/// Flux values on a ladder of radii and their extrapolation to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub flux_at_radius: Vec<(f64, f64)>,
    pub extrapolated: f64,
    pub extrapolation_exponent: f64,
    pub uncertainty: f64,
}

impl MassEstimate {
    pub fn last_flux(&self) -> f64 {
        self.flux_at_radius.last().map_or(0.0, |p| p.1)
    }
}

/// `R_j = 0.1 r_max 2^{j/2}`, `j = 0..6`.
pub fn mass_ladder(r_max: f64) -> Vec<f64> {
    (0..LADDER_RUNGS).map(|j| LADDER_BASE * r_max * 2f64.powf(j as f64 / 2.0)).collect()
}

/// Pairwise Richardson extrapolation of `values` sampled at radii growing by a
/// constant ratio, assuming an `R^{-p}` leading residual. Returns the last
/// extrapolant and the difference of the last two.
pub fn richardson(ladder: &[(f64, f64)], p: f64) -> (f64, f64) {
    if ladder.len() < 2 {
        return (ladder.last().map_or(0.0, |v| v.1), f64::INFINITY);
    }
    let ext: Vec<f64> = ladder
        .windows(2)
        .map(|w| {
            let k = (w[1].0 / w[0].0).powf(p);
            (k * w[1].1 - w[0].1) / (k - 1.0)
        })
        .collect();
    let last = ext[ext.len() - 1];
    let unc = if ext.len() >= 2 { (last - ext[ext.len() - 2]).abs() } else { f64::INFINITY };
    (last, unc)
}

fn check_regime(metric: &WarpedMetric, r: f64) -> Result<()> {
    let grid = metric.grid();
    let min = LADDER_BASE * grid.r_max();
    if !(r >= min * (1.0 - 1e-12)) {
        return Err(Error::OutsideAsymptoticRegime { r, min });
    }
    if r > grid.r_max() {
        return Err(Error::InterpolationOutOfRange { r, lo: grid.r_min(), hi: grid.r_max() });
    }
    Ok(())
}

/// `(1/4ω_n) ∮_{S_R/Γ} (∂_i g_ij - ∂_j g_ii) ν_j dS`. By symmetry the
/// integrand is constant on the sphere, giving `F R^{n-1} / (4|Γ|)` with
/// `F = (n-1)[(α-β)/R - β']`.
pub fn adm_mass_flux(metric: &WarpedMetric, r: f64) -> Result<f64> {
    check_regime(metric, r)?;
    flux_from_jets(metric, &metric.jets(), r)
}

fn flux_from_jets(metric: &WarpedMetric, jets: &RadialJets, r: f64) -> Result<f64> {
    let jet = jets.interpolate(metric.grid(), r)?;
    Ok(flux_from_jet(metric, &jet))
}

fn flux_from_jet(metric: &WarpedMetric, jet: &PointJet) -> f64 {
    let n = metric.dim();
    let f = RadialPair::from_jet(jet).mass_density(n, jet.r);
    f * jet.r.powi(n as i32 - 1) / (4.0 * metric.gamma_order() as f64)
}

/// Ladder of fluxes extrapolated with residual order `2τ - n + 2`.
pub fn adm_mass(metric: &WarpedMetric) -> Result<MassEstimate> {
    let n = metric.dim();
    let profile = metric.profile();
    if !profile.mass_well_defined(n) {
        return Err(Error::MassIllDefined { tau: profile.tau, bound: (n as f64 - 2.0) / 2.0 });
    }
    let jets = metric.jets();
    let ladder = mass_ladder(metric.grid().r_max())
        .into_iter()
        .map(|r| flux_from_jets(metric, &jets, r).map(|m| (r, m)))
        .collect::<Result<Vec<_>>>()?;
    let p = 2.0 * profile.tau - n as f64 + 2.0;
    let (extrapolated, uncertainty) = richardson(&ladder, p);
    Ok(MassEstimate { flux_at_radius: ladder, extrapolated, extrapolation_exponent: p, uncertainty })
}

/// `(b/2)(1 - (b_r/a)^2)` on the sphere of coordinate radius `r` (n = 3).
pub fn hawking_mass(metric: &WarpedMetric, r: f64) -> Result<f64> {
    if metric.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, found: metric.dim() });
    }
    let jet = metric.jets().interpolate(metric.grid(), r)?;
    Ok(hawking_from_jet(&jet))
}

/// Hawking mass at every node (n = 3).
pub fn hawking_profile(metric: &WarpedMetric) -> Result<Vec<f64>> {
    if metric.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, found: metric.dim() });
    }
    let jets = metric.jets();
    Ok((0..jets.len()).map(|i| hawking_from_jet(&jets.at(i))).collect())
}

fn hawking_from_jet(jet: &PointJet) -> f64 {
    let e = jet.slope_defect();
    -0.5 * jet.b() * e * (2.0 + e)
}

/// `(1/4ω_n) ∮ ∂_i R dS^i = R_r R^{n-1} / (4|Γ|)` from nodal scalar curvature.
pub fn mass_rate_flux(state: &FlowState, r: f64) -> Result<f64> {
    mass_rate_flux_of(state.metric(), &state.curvature().scalar, r)
}

pub fn mass_rate_flux_of(metric: &WarpedMetric, scalar: &[f64], r: f64) -> Result<f64> {
    check_regime(metric, r)?;
    let (_, dr) = metric.grid().interpolate(scalar, r)?;
    Ok(dr * r.powi(metric.dim() as i32 - 1) / (4.0 * metric.gamma_order() as f64))
}

/// Flux of the mass density through the full Euclidean sphere of radius `r`
/// by Gauss–Legendre × trapezoid quadrature of the Cartesian integrand,
/// divided by `4ω_3 |Γ|` (n = 3).
pub fn sphere_flux_quadrature(metric: &WarpedMetric, r: f64, polar: usize, azimuthal: usize) -> Result<f64> {
    if metric.dim() != 3 {
        return Err(Error::WrongDimension { expected: 3, found: metric.dim() });
    }
    let (nodes, weights) = gauss_legendre(polar);
    let mut total = 0.0;
    for (&z, &wz) in nodes.iter().zip(&weights) {
        let s = (1.0 - z * z).sqrt();
        for k in 0..azimuthal {
            let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / azimuthal as f64;
            let dir = [s * phi.cos(), s * phi.sin(), z];
            let c = to_cartesian_components(metric, &dir, r)?;
            let mut flux = 0.0;
            for j in 0..3 {
                let mut v = 0.0;
                for i in 0..3 {
                    v += c.dg(i, i, j) - c.dg(j, i, i);
                }
                flux += v * dir[j];
            }
            total += flux * wz * 2.0 * std::f64::consts::PI / azimuthal as f64;
        }
    }
    let area = 4.0 * std::f64::consts::PI;
    Ok(total * r * r / (4.0 * area * metric.gamma_order() as f64))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; count];
    let mut w = vec![0.0; count];
    let nf = count as f64;
    for i in 0..count {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=count {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if count == 0 {
                1.0
            } else if count == 1 {
                z
            } else {
                p1
            };
            let pm = if count == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}
