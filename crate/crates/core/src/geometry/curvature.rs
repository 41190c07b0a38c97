use serde::{Deserialize, Serialize};

use super::metric::{PointJet, RadialJets, WarpedMetric};
use super::stencil::{InnerBoundary, JetBoundary};
use crate::error::{Error, Result};

/// Curvature of a warped product at one point.
///
/// `|Rm|` is the full tensor norm `R_{ijkl} R^{ijkl}`, so that
/// `|Rm|^2 = 4(n-1) K_rad^2 + 2(n-1)(n-2) K_sph^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointCurvature {
    pub k_rad: f64,
    pub k_sph: f64,
    pub rc_rad: f64,
    pub rc_sph: f64,
    pub scalar: f64,
    pub riem_norm: f64,
}

impl PointCurvature {
    pub fn from_sectional(n: usize, k_rad: f64, k_sph: f64) -> Self {
        let m = n as f64 - 1.0;
        let rc_rad = m * k_rad;
        let rc_sph = k_rad + (m - 1.0) * k_sph;
        let scalar = 2.0 * m * k_rad + m * (m - 1.0) * k_sph;
        let riem_norm = (4.0 * m * k_rad * k_rad + 2.0 * m * (m - 1.0) * k_sph * k_sph).sqrt();
        Self { k_rad, k_sph, rc_rad, rc_sph, scalar, riem_norm }
    }

    /// `|Rc|^2` in an orthonormal frame.
    pub fn ricci_norm_sq(&self, n: usize) -> f64 {
        self.rc_rad * self.rc_rad + (n as f64 - 1.0) * self.rc_sph * self.rc_sph
    }

    /// Largest absolute difference of the sectional curvatures relative to
    /// the tensor norm of `reference`.
    pub fn relative_error(&self, reference: &PointCurvature) -> f64 {
        let scale = reference.riem_norm.max(f64::MIN_POSITIVE);
        let d = (self.k_rad - reference.k_rad).abs().max((self.k_sph - reference.k_sph).abs());
        d / scale
    }
}

/// Sectional curvatures of the warped product from a radial jet.
///
/// With arclength `s` (`∂_s = a^{-1} ∂_r`): `K_sph = (1 - b_s^2)/b^2` and
/// `K_rad = -b_ss/b`.
pub fn point_curvature(n: usize, jet: &PointJet) -> PointCurvature {
    let b = jet.b();
    let b_r = jet.b_r();
    let e = jet.slope_defect();
    let k_sph = -e * (2.0 + e) / (b * b);
    let a = jet.a();
    let b_ss = (jet.b_rr() / a - b_r * jet.a_r / (a * a)) / a;
    let k_rad = -b_ss / b;
    PointCurvature::from_sectional(n, k_rad, k_sph)
}

/// Per-node curvature of a warped metric.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurvatureFields {
    pub k_rad: Vec<f64>,
    pub k_sph: Vec<f64>,
    pub rc_rad: Vec<f64>,
    pub rc_sph: Vec<f64>,
    pub scalar: Vec<f64>,
    pub riem_norm: Vec<f64>,
}

impl CurvatureFields {
    fn with_capacity(len: usize) -> Self {
        Self {
            k_rad: Vec::with_capacity(len),
            k_sph: Vec::with_capacity(len),
            rc_rad: Vec::with_capacity(len),
            rc_sph: Vec::with_capacity(len),
            scalar: Vec::with_capacity(len),
            riem_norm: Vec::with_capacity(len),
        }
    }

    fn push(&mut self, p: PointCurvature) {
        self.k_rad.push(p.k_rad);
        self.k_sph.push(p.k_sph);
        self.rc_rad.push(p.rc_rad);
        self.rc_sph.push(p.rc_sph);
        self.scalar.push(p.scalar);
        self.riem_norm.push(p.riem_norm);
    }

    pub fn at(&self, i: usize) -> PointCurvature {
        PointCurvature {
            k_rad: self.k_rad[i],
            k_sph: self.k_sph[i],
            rc_rad: self.rc_rad[i],
            rc_sph: self.rc_sph[i],
            scalar: self.scalar[i],
            riem_norm: self.riem_norm[i],
        }
    }

    pub fn len(&self) -> usize {
        self.scalar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scalar.is_empty()
    }

    pub fn sup_riem(&self) -> f64 {
        self.riem_norm.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn ricci_norm_sq(&self, n: usize) -> Vec<f64> {
        let m = n as f64 - 1.0;
        self.rc_rad.iter().zip(&self.rc_sph).map(|(a, b)| a * a + m * b * b).collect()
    }
}

/// Curvature at every node, with one-sided stencils at both ends.
pub fn curvature_of(metric: &WarpedMetric) -> Result<CurvatureFields> {
    curvature_with(metric, InnerBoundary::OneSided)
}

pub fn curvature_with(metric: &WarpedMetric, inner: impl Into<JetBoundary>) -> Result<CurvatureFields> {
    if metric.len() < 5 {
        return Err(Error::GridTooCoarse { nodes: metric.len(), min: 5 });
    }
    let jets = metric.jets_with(inner);
    Ok(curvature_from_jets(metric.dim(), &jets))
}

pub fn curvature_from_jets(n: usize, jets: &RadialJets) -> CurvatureFields {
    let mut out = CurvatureFields::with_capacity(jets.len());
    for i in 0..jets.len() {
        out.push(point_curvature(n, &jets.at(i)));
    }
    out
}

/// Laplace–Beltrami operator of the warped metric applied to a radial field:
/// `Δf = f_ss + (n-1)(b_s/b) f_s`.
pub fn laplacian(metric: &WarpedMetric, jets: &RadialJets, f: &[f64], inner: InnerBoundary) -> Vec<f64> {
    let (f_r, f_rr) = metric.grid().radial_derivatives(f, inner);
    let m = metric.dim() as f64 - 1.0;
    (0..f.len())
        .map(|i| {
            let j = jets.at(i);
            let a = j.a();
            let f_s = f_r[i] / a;
            let f_ss = (f_rr[i] - f_r[i] * j.a_r / a) / (a * a);
            f_ss + m * j.b_r() / (a * j.b()) * f_s
        })
        .collect()
}

/// Proper-length gradient squared `|Df|^2 = (f_r / a)^2`.
pub fn gradient_norm_sq(metric: &WarpedMetric, f: &[f64], inner: InnerBoundary) -> Vec<f64> {
    let (f_r, _) = metric.grid().radial_derivatives(f, inner);
    f_r.iter().zip(metric.a()).map(|(d, a)| (d / a).powi(2)).collect()
}
