use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use super::stencil::{InnerBoundary, JetBoundary};
use crate::error::{Error, Result};

/// Asymptotic data attached to a metric: the order `tau` of `g - δ`, an
/// optional scalar-curvature decay exponent `q`, and the volume-growth
/// constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticProfile {
    pub tau: f64,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default = "default_v_lower")]
    pub v_lower: f64,
}

fn default_v_lower() -> f64 {
    0.0
}

impl AsymptoticProfile {
    pub fn new(tau: f64) -> Self {
        Self { tau, q: None, v_lower: 0.0 }
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    /// Whether the ADM mass is well defined in dimension `n`.
    pub fn mass_well_defined(&self, n: usize) -> bool {
        self.tau > (n as f64 - 2.0) / 2.0
    }
}

/// The finite group Γ of an ALE end, represented by its order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientStructure {
    pub order: u32,
}

impl QuotientStructure {
    pub fn new(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("quotient order must be >= 1".into()));
        }
        Ok(Self { order })
    }

    /// Fraction of the Euclidean sphere seen by a coordinate sphere.
    pub fn cross_section_area_factor(&self) -> f64 {
        1.0 / self.order as f64
    }

    /// Asymptotic volume ratio of the exact model `R^n / Γ`.
    pub fn model_volume_ratio(&self) -> f64 {
        self.cross_section_area_factor()
    }
}

/// `g = a(r)^2 dr^2 + b(r)^2 g_{S^{n-1}}` sampled on a radial grid.
///
/// The deviations `a - 1` and `b/r - 1` are the stored state; `a` and `b`
/// are kept alongside for convenience. Far out the deviations are tiny and
/// would lose most of their bits if only `a` and `b` were stored.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedMetric {
    n: usize,
    grid: Arc<RadialGrid>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    quotient: QuotientStructure,
    profile: AsymptoticProfile,
}

impl WarpedMetric {
    pub fn new(
        n: usize,
        grid: Arc<RadialGrid>,
        a: Vec<f64>,
        b: Vec<f64>,
        gamma_order: u32,
        profile: AsymptoticProfile,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(profile.tau > 0.0) {
            return Err(Error::InvalidArgument(format!("asymptotic order tau = {} must be positive", profile.tau)));
        }
        let shell = Self::shell(n, grid, QuotientStructure::new(gamma_order)?, profile);
        shell.with_samples(a, b)
    }

    /// Build from the deviations `a - 1` and `b/r - 1`.
    pub fn from_deviations(
        n: usize,
        grid: Arc<RadialGrid>,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        gamma_order: u32,
        profile: AsymptoticProfile,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(profile.tau > 0.0) {
            return Err(Error::InvalidArgument(format!("asymptotic order tau = {} must be positive", profile.tau)));
        }
        let shell = Self::shell(n, grid, QuotientStructure::new(gamma_order)?, profile);
        shell.with_deviations(alpha, beta)
    }

    fn shell(n: usize, grid: Arc<RadialGrid>, quotient: QuotientStructure, profile: AsymptoticProfile) -> Self {
        Self { n, grid, alpha: Vec::new(), beta: Vec::new(), a: Vec::new(), b: Vec::new(), quotient, profile }
    }

    /// Flat `R^n / Γ` on `grid`.
    pub fn flat(n: usize, grid: Arc<RadialGrid>, gamma_order: u32, tau: f64) -> Result<Self> {
        let a = vec![1.0; grid.len()];
        let b = grid.radii().to_vec();
        Self::new(n, grid, a, b, gamma_order, AsymptoticProfile::new(tau))
    }

    fn validate(&self) -> Result<()> {
        let len = self.grid.len();
        if self.alpha.len() != len || self.beta.len() != len || self.a.len() != len || self.b.len() != len {
            return Err(Error::MismatchedGrids);
        }
        let r = self.grid.radii();
        for i in 0..len {
            let (a, b) = (self.a[i], self.b[i]);
            if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                return Err(Error::NonPositiveMetric { r: r[i], a, b });
            }
        }
        for i in 1..len {
            if !(self.b[i] > self.b[i - 1]) {
                return Err(Error::NonMonotoneArealRadius { r: r[i] });
            }
        }
        Ok(())
    }

    /// A metric with new samples on the same grid and with the same
    /// dimension, quotient and profile.
    pub fn with_samples(&self, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let r = self.grid.radii();
        if a.len() != r.len() || b.len() != r.len() {
            return Err(Error::MismatchedGrids);
        }
        let alpha = a.iter().map(|a| a - 1.0).collect();
        let beta = b.iter().zip(r).map(|(b, r)| b / r - 1.0).collect();
        let metric = Self { alpha, beta, a, b, ..self.clone_shell() };
        metric.validate()?;
        Ok(metric)
    }

    /// As [`Self::with_samples`] from the deviations `a - 1` and `b/r - 1`.
    pub fn with_deviations(&self, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let r = self.grid.radii();
        if alpha.len() != r.len() || beta.len() != r.len() {
            return Err(Error::MismatchedGrids);
        }
        let a = alpha.iter().map(|v| 1.0 + v).collect();
        let b = beta.iter().zip(r).map(|(v, r)| r * (1.0 + v)).collect();
        let metric = Self { alpha, beta, a, b, ..self.clone_shell() };
        metric.validate()?;
        Ok(metric)
    }

    fn clone_shell(&self) -> Self {
        Self::shell(self.n, Arc::clone(&self.grid), self.quotient, self.profile)
    }

    pub fn with_profile(mut self, profile: AsymptoticProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `a - 1` at every node.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `b/r - 1` at every node.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn gamma_order(&self) -> u32 {
        self.quotient.order
    }

    pub fn quotient(&self) -> QuotientStructure {
        self.quotient
    }

    pub fn profile(&self) -> &AsymptoticProfile {
        &self.profile
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n == other.n && self.quotient == other.quotient && *self.grid == *other.grid
    }

    /// Area of the coordinate sphere of Euclidean radius one, divided by |Γ|.
    pub fn unit_cross_section(&self) -> f64 {
        sphere_area(self.n) * self.quotient.cross_section_area_factor()
    }

    /// Riemannian volume density per unit `r`: `a b^{n-1} · ω_n / |Γ|`.
    pub fn volume_density(&self) -> Vec<f64> {
        let c = self.unit_cross_section();
        self.a.iter().zip(&self.b).map(|(a, b)| c * a * b.powi(self.n as i32 - 1)).collect()
    }

    pub fn jets(&self) -> RadialJets {
        self.jets_with(InnerBoundary::OneSided)
    }

    pub fn jets_with(&self, inner: impl Into<JetBoundary>) -> RadialJets {
        let inner = inner.into();
        let (a_r, a_rr) = self.grid.radial_derivatives(&self.alpha, inner.lapse);
        let (bt_r, bt_rr) = self.grid.radial_derivatives(&self.beta, inner.areal);
        RadialJets {
            r: self.grid.radii().to_vec(),
            at: self.alpha.clone(),
            a_r,
            a_rr,
            bt: self.beta.clone(),
            bt_r,
            bt_rr,
        }
    }
}

/// Area of the unit sphere `S^{n-1} ⊂ R^n`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(n - 2) / (n as f64 - 2.0),
    }
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

/// Nodal values of the lapse `a` and the relative areal radius
/// `b/r - 1` together with their first two `r`-derivatives.
///
/// Working with `b/r - 1` keeps the large-`r` derivatives free of the
/// cancellation that differentiating `b` itself would suffer.
#[derive(Debug, Clone)]
pub struct RadialJets {
    pub r: Vec<f64>,
    /// `a - 1`.
    pub at: Vec<f64>,
    pub a_r: Vec<f64>,
    pub a_rr: Vec<f64>,
    pub bt: Vec<f64>,
    pub bt_r: Vec<f64>,
    pub bt_rr: Vec<f64>,
}

/// Jet of the metric functions at a single radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointJet {
    pub r: f64,
    /// `a - 1`.
    pub at: f64,
    pub a_r: f64,
    pub a_rr: f64,
    pub bt: f64,
    pub bt_r: f64,
    pub bt_rr: f64,
}

impl PointJet {
    pub fn a(&self) -> f64 {
        1.0 + self.at
    }

    pub fn b(&self) -> f64 {
        self.r * (1.0 + self.bt)
    }

    pub fn b_r(&self) -> f64 {
        1.0 + self.bt + self.r * self.bt_r
    }

    pub fn b_rr(&self) -> f64 {
        2.0 * self.bt_r + self.r * self.bt_rr
    }

    /// `b_r / a - 1`, i.e. `b_s - 1` in arclength.
    pub fn slope_defect(&self) -> f64 {
        (self.bt + self.r * self.bt_r - self.at) / self.a()
    }
}

impl RadialJets {
    pub fn at(&self, i: usize) -> PointJet {
        PointJet {
            r: self.r[i],
            at: self.at[i],
            a_r: self.a_r[i],
            a_rr: self.a_rr[i],
            bt: self.bt[i],
            bt_r: self.bt_r[i],
            bt_rr: self.bt_rr[i],
        }
    }

    /// Interpolated jet at an arbitrary radius.
    pub fn interpolate(&self, grid: &RadialGrid, r: f64) -> Result<PointJet> {
        let (at, _) = grid.interpolate(&self.at, r)?;
        let (a_r, _) = grid.interpolate(&self.a_r, r)?;
        let (a_rr, _) = grid.interpolate(&self.a_rr, r)?;
        let (bt, _) = grid.interpolate(&self.bt, r)?;
        let (bt_r, _) = grid.interpolate(&self.bt_r, r)?;
        let (bt_rr, _) = grid.interpolate(&self.bt_rr, r)?;
        Ok(PointJet { r, at, a_r, a_rr, bt, bt_r, bt_rr })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}
