//! The warped metric written in asymptotically Euclidean coordinates,
//! `g_ij = β δ_ij + (α - β) x_i x_j / r^2` with `α = a^2`, `β = (b/r)^2`.

use super::metric::{PointJet, WarpedMetric};
use crate::error::{Error, Result};

/// `α`, `β` as deviations from one, with two radial derivatives each.
#[derive(Debug, Clone, Copy)]
pub struct RadialPair {
    pub alpha_dev: f64,
    pub alpha_r: f64,
    pub alpha_rr: f64,
    pub beta_dev: f64,
    pub beta_r: f64,
    pub beta_rr: f64,
}

impl RadialPair {
    pub fn from_jet(j: &PointJet) -> Self {
        let (a, bt) = (j.a(), j.bt);
        Self {
            alpha_dev: j.at * (2.0 + j.at),
            alpha_r: 2.0 * a * j.a_r,
            alpha_rr: 2.0 * j.a_r * j.a_r + 2.0 * a * j.a_rr,
            beta_dev: bt * (2.0 + bt),
            beta_r: 2.0 * (1.0 + bt) * j.bt_r,
            beta_rr: 2.0 * j.bt_r * j.bt_r + 2.0 * (1.0 + bt) * j.bt_rr,
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self {
            alpha_dev: self.alpha_dev - other.alpha_dev,
            alpha_r: self.alpha_r - other.alpha_r,
            alpha_rr: self.alpha_rr - other.alpha_rr,
            beta_dev: self.beta_dev - other.beta_dev,
            beta_r: self.beta_r - other.beta_r,
            beta_rr: self.beta_rr - other.beta_rr,
        }
    }

    /// Radial component of the mass density vector,
    /// `F = (∂_i g_ij - ∂_j g_ii) x_j / r = (n-1)[(α-β)/r - β']`.
    pub fn mass_density(&self, n: usize, r: f64) -> f64 {
        (n as f64 - 1.0) * ((self.alpha_dev - self.beta_dev) / r - self.beta_r)
    }

    /// `dF/dr`.
    pub fn mass_density_r(&self, n: usize, r: f64) -> f64 {
        let phi = self.alpha_dev - self.beta_dev;
        let phi_r = self.alpha_r - self.beta_r;
        (n as f64 - 1.0) * (phi_r / r - phi / (r * r) - self.beta_rr)
    }
}

/// `g_ij`, `∂_k g_ij` and optionally `∂_l ∂_k g_ij` at one point.
///
/// Index layout: `g[i*n + j]`, `dg[(k*n + i)*n + j]`,
/// `ddg[((l*n + k)*n + i)*n + j]`.
#[derive(Debug, Clone)]
pub struct CartesianComponents {
    pub n: usize,
    pub point: Vec<f64>,
    /// `g_ij - δ_ij`, kept separately to avoid cancellation.
    pub deviation: Vec<f64>,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub ddg: Option<Vec<f64>>,
}

impl CartesianComponents {
    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.n + j]
    }

    pub fn dg(&self, k: usize, i: usize, j: usize) -> f64 {
        self.dg[(k * self.n + i) * self.n + j]
    }

    pub fn ddg(&self, l: usize, k: usize, i: usize, j: usize) -> Option<f64> {
        let n = self.n;
        self.ddg.as_ref().map(|d| d[((l * n + k) * n + i) * n + j])
    }
}

/// Components at `x = r · direction` built analytically from radial data.
pub fn components_from_pair(n: usize, pair: &RadialPair, x: &[f64], with_hessian: bool) -> CartesianComponents {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nv: Vec<f64> = x.iter().map(|v| v / r).collect();
    let phi = pair.alpha_dev - pair.beta_dev;
    let phi_r = pair.alpha_r - pair.beta_r;
    let phi_rr = pair.alpha_rr - pair.beta_rr;
    let r2 = r * r;
    let psi = phi / r2;
    let psi_r = phi_r / r2 - 2.0 * phi / (r2 * r);
    let psi_rr = phi_rr / r2 - 4.0 * phi_r / (r2 * r) + 6.0 * phi / (r2 * r2);
    let (bd, b1, b2) = (pair.beta_dev, pair.beta_r, pair.beta_rr);
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };

    let mut deviation = vec![0.0; n * n];
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let h = bd * d(i, j) + psi * x[i] * x[j];
            deviation[i * n + j] = h;
            g[i * n + j] = d(i, j) + h;
        }
    }
    let mut dg = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                dg[(k * n + i) * n + j] =
                    b1 * nv[k] * d(i, j) + psi_r * nv[k] * x[i] * x[j] + psi * (d(k, i) * x[j] + x[i] * d(k, j));
            }
        }
    }
    let ddg = with_hessian.then(|| {
        let mut out = vec![0.0; n * n * n * n];
        for l in 0..n {
            for k in 0..n {
                let radial2 = nv[l] * nv[k];
                let tangential = (d(k, l) - radial2) / r;
                for i in 0..n {
                    for j in 0..n {
                        out[((l * n + k) * n + i) * n + j] = (b2 * radial2 + b1 * tangential) * d(i, j)
                            + (psi_rr * radial2 + psi_r * tangential) * x[i] * x[j]
                            + psi_r * nv[k] * (d(l, i) * x[j] + x[i] * d(l, j))
                            + psi_r * nv[l] * (d(k, i) * x[j] + x[i] * d(k, j))
                            + psi * (d(k, i) * d(l, j) + d(l, i) * d(k, j));
                    }
                }
            }
        }
        out
    });
    CartesianComponents { n, point: x.to_vec(), deviation, g, dg, ddg }
}

/// `g_ij` and `∂_k g_ij` at the Cartesian point `r · direction`.
pub fn to_cartesian_components(metric: &WarpedMetric, direction: &[f64], r: f64) -> Result<CartesianComponents> {
    let n = metric.dim();
    if direction.len() != n {
        return Err(Error::InvalidArgument(format!("direction has {} components, expected {n}", direction.len())));
    }
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("direction has norm {norm}, expected 1")));
    }
    let jet = metric.jets().interpolate(metric.grid(), r)?;
    let x: Vec<f64> = direction.iter().map(|v| v * r).collect();
    Ok(components_from_pair(n, &RadialPair::from_jet(&jet), &x, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AsymptoticProfile, RadialGrid};
    use std::sync::Arc;

    #[test]
    fn flat_components_are_kronecker() {
        let g = Arc::new(RadialGrid::compactified(256, 1.0, 1e4, 30.0).unwrap());
        let m = WarpedMetric::flat(3, g, 1, 1.0).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let c = to_cartesian_components(&m, &[s, s, s], 100.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(c.g(i, j), if i == j { 1.0 } else { 0.0 });
                for k in 0..3 {
                    assert_eq!(c.dg(k, i, j), 0.0);
                }
            }
        }
        assert!(to_cartesian_components(&m, &[1.0, 1.0, 0.0], 100.0).is_err());
    }

    #[test]
    fn schwarzschild_radial_component() {
        let g = Arc::new(RadialGrid::compactified(1024, 1.0, 1e4, 30.0).unwrap());
        let a = g.radii().iter().map(|&r| if r > 3.0 { (1.0 - 2.0 / r).powf(-0.5) } else { 1.0 }).collect();
        let m = WarpedMetric::new(3, g.clone(), a, g.radii().to_vec(), 1, AsymptoticProfile::new(1.0)).unwrap();
        let c = to_cartesian_components(&m, &[1.0, 0.0, 0.0], 100.0).unwrap();
        assert!((c.g(0, 0) - 1.0 / 0.98).abs() < 1e-10);
        assert!((c.g(1, 1) - 1.0).abs() < 1e-12);
        assert!(c.g(0, 1).abs() < 1e-14);
    }

    /// Finite differences of the tabulated embedding reproduce the analytic
    /// first and second derivatives.
    #[test]
    fn derivatives_match_finite_differences() {
        let jet_at = |r: f64| PointJet {
            r,
            at: 0.3 / r,
            a_r: -0.3 / (r * r),
            a_rr: 0.6 / (r * r * r),
            bt: 0.2 / (r * r),
            bt_r: -0.4 / (r * r * r),
            bt_rr: 1.2 / (r * r * r * r),
        };
        let comps = |x: &[f64], hess: bool| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            components_from_pair(3, &RadialPair::from_jet(&jet_at(r)), x, hess)
        };
        let x0 = [1.3, -0.7, 2.1];
        let c = comps(&x0, true);
        let h = 1e-4;
        for k in 0..3 {
            let mut xp = x0;
            let mut xm = x0;
            xp[k] += h;
            xm[k] -= h;
            let (cp, cm) = (comps(&xp, false), comps(&xm, false));
            for i in 0..3 {
                for j in 0..3 {
                    let fd = (cp.g(i, j) - cm.g(i, j)) / (2.0 * h);
                    assert!((fd - c.dg(k, i, j)).abs() < 1e-7);
                    for l in 0..3 {
                        let fd2 = (cp.dg(l, i, j) - cm.dg(l, i, j)) / (2.0 * h);
                        assert!((fd2 - c.ddg(k, l, i, j).unwrap()).abs() < 1e-6);
                    }
                }
            }
        }
    }
}
