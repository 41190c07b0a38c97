//! Initial metrics: flat space and its quotients, a Schwarzschild slice glued
//! to flat space, conformally flat bumps with prescribed scalar decay,
//! randomized perturbations of flat space, and a convergent family of bumps.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AsymptoticProfile, RadialGrid, WarpedMetric};

/// Largest dimension the constructors accept.
pub const MAX_DIMENSION: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Flat,
    SchwarzschildSlice,
    ConformalBump,
    PerturbedFlat,
    ConvergentFamilyMember,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub kind: InitialKind,
    pub n: usize,
    /// Mass parameter for the Schwarzschild slice, conformal amplitude for
    /// bumps, log-amplitude for random perturbations.
    #[serde(default, alias = "mass_parameter")]
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default = "one")]
    pub gamma_order: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_index: Option<u32>,
}

fn one() -> u32 {
    1
}

impl InitialDataSpec {
    pub fn new(kind: InitialKind, n: usize, amplitude: f64) -> Self {
        Self { kind, n, amplitude, tau: None, q: None, gamma_order: 1, seed: 0, family_index: None }
    }

    pub fn flat(n: usize) -> Self {
        Self::new(InitialKind::Flat, n, 0.0)
    }

    pub fn schwarzschild(n: usize, mass: f64) -> Self {
        Self::new(InitialKind::SchwarzschildSlice, n, mass)
    }

    /// `u = 1 + χ (A r^{2-n} + B r^{2-q})`; with `q` unset the second term is absent.
    pub fn conformal_bump(n: usize, amplitude: f64, q: Option<f64>) -> Self {
        Self { q, ..Self::new(InitialKind::ConformalBump, n, amplitude) }
    }

    pub fn perturbed_flat(n: usize, amplitude: f64, tau: f64, seed: u64) -> Self {
        Self { tau: Some(tau), seed, ..Self::new(InitialKind::PerturbedFlat, n, amplitude) }
    }

    pub fn with_gamma(mut self, order: u32) -> Self {
        self.gamma_order = order;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    /// Asymptotic order the constructor realizes when `tau` is unset.
    pub fn natural_tau(&self) -> f64 {
        let n = self.n as f64;
        match self.kind {
            InitialKind::Flat | InitialKind::SchwarzschildSlice => n - 2.0,
            InitialKind::ConformalBump | InitialKind::ConvergentFamilyMember => match self.q {
                Some(q) => (n - 2.0).min(q - 2.0),
                None => n - 2.0,
            },
            InitialKind::PerturbedFlat => 1.0,
        }
    }

    pub fn profile(&self) -> AsymptoticProfile {
        let mut p = AsymptoticProfile::new(self.tau.unwrap_or_else(|| self.natural_tau()));
        p.q = self.q;
        p
    }

    /// ADM mass of the constructed metric, where it is known in closed form.
    /// The quotient sphere carries `1/|Γ|` of the flux.
    pub fn expected_mass(&self) -> Option<f64> {
        let n = self.n as f64;
        let full = match self.kind {
            InitialKind::Flat => Some(0.0),
            InitialKind::SchwarzschildSlice => Some(self.amplitude),
            InitialKind::ConformalBump => Some((n - 1.0) * self.amplitude),
            InitialKind::ConvergentFamilyMember => {
                Some((n - 1.0) * family_amplitude(self.amplitude, self.family_index))
            }
            InitialKind::PerturbedFlat => None,
        };
        full.map(|m| m / self.gamma_order.max(1) as f64)
    }
}

/// `ψ(t)/(ψ(t) + ψ(1-t))` with `ψ(t) = e^{-1/t}`: zero for `t ≤ 0`, one for `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    let psi = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let (p, q) = (psi(t), psi(1.0 - t));
        p / (p + q)
    }
}

/// Switch vanishing for `r ≤ r0` and equal to one for `r ≥ r1`.
pub fn switch(r: f64, r0: f64, r1: f64) -> f64 {
    smooth_step((r - r0) / (r1 - r0))
}

/// Amplitude of family member `k`; the limit when `k` is `None`.
pub fn family_amplitude(limit: f64, k: Option<u32>) -> f64 {
    match k {
        Some(k) => limit * (1.0 + 0.1 * 0.5f64.powi(k as i32)),
        None => limit,
    }
}

pub fn build(spec: &InitialDataSpec, grid: Arc<RadialGrid>) -> Result<WarpedMetric> {
    if !(3..=MAX_DIMENSION).contains(&spec.n) {
        return Err(Error::UnsupportedDimension(spec.n));
    }
    if !spec.amplitude.is_finite() {
        return Err(Error::InvalidArgument("amplitude must be finite".into()));
    }
    let profile = spec.profile();
    let r_min = grid.r_min();
    let n = spec.n;
    let nf = n as f64;
    // deviations a - 1 and b/r - 1, computed without cancellation
    let (alpha, beta): (Vec<f64>, Vec<f64>) = match spec.kind {
        InitialKind::Flat => (vec![0.0; grid.len()], vec![0.0; grid.len()]),
        InitialKind::SchwarzschildSlice => {
            let m = spec.amplitude;
            let c = 4.0 / (nf - 1.0);
            let horizon = (c * m.abs()).powf(1.0 / (nf - 2.0));
            let r0 = (2.0 * horizon).max(2.0 * r_min);
            grid.radii()
                .iter()
                .map(|&r| {
                    let mh = m * switch(r, r0, 2.0 * r0);
                    let x = (c * mh / r.powf(nf - 2.0)).min(1.0);
                    ((-0.5 * (-x).ln_1p()).exp_m1(), 0.0)
                })
                .unzip()
        }
        InitialKind::ConformalBump | InitialKind::ConvergentFamilyMember => {
            let amp = if spec.kind == InitialKind::ConvergentFamilyMember {
                family_amplitude(spec.amplitude, spec.family_index)
            } else {
                spec.amplitude
            };
            conformal_samples(&grid, n, amp, spec.q)
        }
        InitialKind::PerturbedFlat => perturbed_samples(&grid, spec.amplitude, profile.tau, spec.seed),
    };
    WarpedMetric::from_deviations(n, grid, alpha, beta, spec.gamma_order, profile).map_err(|e| match e {
        Error::NonPositiveMetric { .. } | Error::NonMonotoneArealRadius { .. } => {
            Error::AmplitudeTooLarge(format!("amplitude {} degenerates the metric: {e}", spec.amplitude))
        }
        other => other,
    })
}

fn conformal_samples(grid: &RadialGrid, n: usize, amp: f64, q: Option<f64>) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let r_min = grid.r_min();
    let (r0, r1) = (2.0 * r_min, 4.0 * r_min);
    let second = q.map(|q| (-0.5 * amp * r1.powf(q - nf), q));
    let p = 2.0 / (nf - 2.0);
    grid.radii()
        .iter()
        .map(|&r| {
            let mut w = amp * r.powf(2.0 - nf);
            if let Some((coef, q)) = second {
                w += coef * r.powf(2.0 - q);
            }
            let dev = (p * (switch(r, r0, r1) * w).ln_1p()).exp_m1();
            (dev, dev)
        })
        .unzip()
}

/// Number of random radial bumps in a perturbation.
const PERTURBATION_BUMPS: usize = 4;

fn perturbed_samples(grid: &RadialGrid, eps: f64, tau: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let r_min = grid.r_min();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> Vec<(f64, f64)> {
        (0..PERTURBATION_BUMPS)
            .map(|_| {
                let c = rng.gen_range(-0.5..0.5);
                let rho = r_min * 4.0 * 25f64.powf(rng.gen_range(0.0..1.0));
                (c, rho)
            })
            .collect()
    };
    let (bumps_a, bumps_b) = (draw(), draw());
    let shape = |r: f64, bumps: &[(f64, f64)]| {
        let envelope = switch(r, 2.0 * r_min, 4.0 * r_min) * (4.0 * r_min / r).powf(tau);
        let modulation: f64 = bumps.iter().map(|&(c, rho)| c * (-(r / rho).ln().powi(2) / 0.5).exp()).sum();
        eps * envelope * (1.0 + modulation)
    };
    grid.radii().iter().map(|&r| (shape(r, &bumps_a).exp_m1(), shape(r, &bumps_b).exp_m1())).unzip()
}

/// Member `k` of the convergent conformal family with limit amplitude `base.amplitude`.
pub fn convergent_family(base: &InitialDataSpec, k: u32, grid: Arc<RadialGrid>) -> Result<WarpedMetric> {
    let spec = InitialDataSpec { kind: InitialKind::ConvergentFamilyMember, family_index: Some(k), ..base.clone() };
    build(&spec, grid)
}

/// The limit `g_∞` of the convergent family.
pub fn family_limit(base: &InitialDataSpec, grid: Arc<RadialGrid>) -> Result<WarpedMetric> {
    let spec = InitialDataSpec { kind: InitialKind::ConvergentFamilyMember, family_index: None, ..base.clone() };
    build(&spec, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::compactified(512, 1.0, 1e4, 30.0).unwrap())
    }

    #[test]
    fn switch_is_smooth_and_saturates() {
        assert_eq!(switch(1.0, 2.0, 4.0), 0.0);
        assert_eq!(switch(4.5, 2.0, 4.0), 1.0);
        assert!((switch(3.0, 2.0, 4.0) - 0.5).abs() < 1e-15);
        assert!(smooth_step(0.01) < 1e-40);
    }

    #[test]
    fn schwarzschild_is_exact_outside_the_gluing_zone() {
        let g = grid();
        let m = build(&InitialDataSpec::schwarzschild(3, 1.0), g.clone()).unwrap();
        for (i, &r) in g.radii().iter().enumerate() {
            if r >= 8.0 {
                assert!((m.a()[i] - (1.0 - 2.0 / r).powf(-0.5)).abs() < 1e-15);
            }
            if r <= 4.0 {
                assert_eq!(m.a()[i], 1.0);
            }
        }
    }

    #[test]
    fn degenerate_amplitudes_are_rejected() {
        let spec = InitialDataSpec::conformal_bump(3, -20.0, None);
        assert!(matches!(build(&spec, grid()), Err(Error::AmplitudeTooLarge(_))));
        assert!(matches!(build(&InitialDataSpec::flat(7), grid()), Err(Error::UnsupportedDimension(7))));
    }

    #[test]
    fn spec_json_uses_documented_field_names() {
        let json = r#"{"kind":"schwarzschild_slice","n":3,"mass_parameter":1.0,"gamma_order":1,"seed":0}"#;
        let spec: InitialDataSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec, InitialDataSpec::schwarzschild(3, 1.0));
        let back: InitialDataSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn perturbations_are_deterministic_and_flat_inside() {
        let spec = InitialDataSpec::perturbed_flat(3, 0.05, 1.0, 7);
        let (m1, m2) = (build(&spec, grid()).unwrap(), build(&spec, grid()).unwrap());
        assert_eq!(m1, m2);
        let g = grid();
        for (i, &r) in g.radii().iter().enumerate().take_while(|(_, &r)| r <= 2.0) {
            assert_eq!(m1.a()[i], 1.0, "r = {r}");
            assert_eq!(m1.b()[i], r);
        }
    }
}
