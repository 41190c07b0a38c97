use serde::{Deserialize, Serialize};

use super::decay::decay_fit_window;
use super::integrals::{l1_scalar_with, weighted_sobolev_norm, FitWindow, L1Scalar, WeightedNormSpec};
use super::mass::{adm_mass, mass_ladder, mass_rate_flux, richardson, MassEstimate};
use super::residuals::{
    default_annulus, mass_density_decay, mass_density_profile, quadratic_derivative, total_scalar_rate_profile,
    total_scalar_sample_on, TotalScalarSample,
};
use super::volume::{asymptotic_volume_ratio, volume_rate_profile, volume_sample, VolumeSample};
use crate::error::Result;
use crate::flow::{
    cfl_dt, heat_step_between, scalar_evolution_residual, step, FlowState, HeatField, Observer, PINNED_NODES,
    SCALAR_INNER,
};
use crate::geometry::gradient_norm_sq;

/// Nodes next to the inner wall left out of pointwise residual maxima.
pub const WALL_NODES: usize = 4;

/// Heat solution carried along the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatConfig {
    /// Core radius of the initial envelope, in units of `r_min`.
    pub core: f64,
    pub sigma: f64,
}

impl Default for HeatConfig {
    fn default() -> Self {
        Self { core: 4.0, sigma: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnosticsConfig {
    /// Outer fit window `[lo, hi]` as fractions of `r_max`.
    pub fit_window: [f64; 2],
    /// Weighted norm; `None` picks [`WeightedNormSpec::default_for`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<WeightedNormSpec>,
    /// Radius of the ball in the volume-rate check, in units of `r_min`.
    pub volume_radius: f64,
    /// Take probe steps at each record to evaluate the evolution residuals.
    pub residuals: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heat: Option<HeatConfig>,
    /// Safety factor of the probe step; runs copy the flow's value.
    #[serde(skip)]
    pub cfl_safety: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self { fit_window: [0.01, 0.1], norm: None, volume_radius: 50.0, residuals: true, heat: None, cfl_safety: 0.5 }
    }
}

impl DiagnosticsConfig {
    pub fn window(&self, r_max: f64) -> FitWindow {
        FitWindow { lo: self.fit_window[0] * r_max, hi: self.fit_window[1] * r_max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    /// Max over nodes of the scalar-curvature evolution residual.
    pub scalar_evolution: f64,
    /// Volume-rate residual divided by `V(B_r)`. This and the next one come
    /// from the neighbouring records and stay zero until three exist.
    pub volume_rate: f64,
    pub total_scalar_rate: f64,
    /// Divergence-identity residual at the top of the fit window.
    pub mass_density: f64,
    pub mass_density_exp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatRecord {
    pub sup: f64,
    pub inf: f64,
    pub decay_exp: f64,
    pub grad_sq_sup: f64,
}

/// Every monitored quantity at one flow time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step_count: u64,
    pub mass: MassEstimate,
    pub mass_rate_flux: f64,
    /// `(R, flux)` for every ladder radius.
    pub mass_rate_ladder: Vec<(f64, f64)>,
    pub mu: f64,
    pub mu_uncertainty: f64,
    pub riem_decay_exp: f64,
    pub scalar_decay_exp: f64,
    pub sup_riem: f64,
    pub min_scalar: f64,
    pub l1_scalar: L1Scalar,
    pub wkq_norm: f64,
    pub mtau_norm: f64,
    pub total_scalar: TotalScalarSample,
    pub volume: VolumeSample,
    pub residuals: Residuals,
    pub heat: Option<HeatRecord>,
}

impl DiagnosticsRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.mass.extrapolated,
            self.mass.uncertainty,
            self.mass_rate_flux,
            self.mu,
            self.riem_decay_exp,
            self.scalar_decay_exp,
            self.l1_scalar.truncated,
            self.wkq_norm,
            self.mtau_norm,
            self.residuals.scalar_evolution,
            self.residuals.volume_rate,
            self.residuals.total_scalar_rate,
            self.residuals.mass_density,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub records: Vec<DiagnosticsRecord>,
    /// Truncated `∫_0^t ∫_annulus |Rc|^2 dv dt` up to the last step.
    pub ricci_sq_time_integral: f64,
}

impl DiagnosticsSeries {
    /// `max_t |m(t) - m(0)|`.
    pub fn mass_drift(&self) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        let m0 = first.mass.extrapolated;
        self.records.iter().map(|r| (r.mass.extrapolated - m0).abs()).fold(0.0, f64::max)
    }

    /// `max_t |μ(t) - μ(0)|`.
    pub fn mu_drift(&self) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        self.records.iter().map(|r| (r.mu - first.mu).abs()).fold(0.0, f64::max)
    }

    /// `dm/dt` by centered differences of the extrapolated mass against the
    /// mass-rate flux at the top ladder radius, at every interior record.
    pub fn mass_rate_comparison(&self) -> Vec<MassRateSample> {
        self.records
            .windows(3)
            .filter(|w| w[1].t > w[0].t && w[2].t > w[1].t)
            .map(|w| {
                let derivative = |value: &dyn Fn(&DiagnosticsRecord) -> f64| {
                    quadratic_derivative(
                        [(w[0].t, value(&w[0])), (w[1].t, value(&w[1])), (w[2].t, value(&w[2]))],
                        w[1].t,
                    )
                };
                let by_difference = derivative(&|r| r.mass.extrapolated);
                let coarser = derivative(&|r| {
                    let ladder = &r.mass.flux_at_radius;
                    richardson(&ladder[..ladder.len().saturating_sub(1)], r.mass.extrapolation_exponent).0
                });
                let ladder = &w[1].mass_rate_ladder;
                let flux_uncertainty = match ladder.len() {
                    0 | 1 => f64::INFINITY,
                    k => (ladder[k - 1].1 - ladder[k - 2].1).abs(),
                };
                MassRateSample {
                    t: w[1].t,
                    by_difference,
                    difference_uncertainty: (by_difference - coarser).abs(),
                    flux: w[1].mass_rate_flux,
                    flux_uncertainty,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassRateSample {
    pub t: f64,
    pub by_difference: f64,
    /// Change of the differenced rate when the top ladder rung is dropped.
    pub difference_uncertainty: f64,
    pub flux: f64,
    /// Change of the flux between the two largest ladder radii.
    pub flux_uncertainty: f64,
}

impl MassRateSample {
    pub fn agrees(&self) -> bool {
        (self.by_difference - self.flux).abs() <= self.difference_uncertainty + self.flux_uncertainty
    }
}

/// Observer that evaluates the full diagnostic suite at every record.
#[derive(Debug)]
pub struct Recorder {
    config: DiagnosticsConfig,
    series: DiagnosticsSeries,
    heat: Option<HeatField>,
    annulus: Option<(usize, usize)>,
    last_ricci_sq: Option<f64>,
}

impl Recorder {
    pub fn new(config: DiagnosticsConfig) -> Self {
        Self { config, series: DiagnosticsSeries::default(), heat: None, annulus: None, last_ricci_sq: None }
    }

    pub fn series(&self) -> &DiagnosticsSeries {
        &self.series
    }

    pub fn into_series(self) -> DiagnosticsSeries {
        self.series
    }

    pub fn heat(&self) -> Option<&HeatField> {
        self.heat.as_ref()
    }

    fn annulus(&mut self, state: &FlowState) -> (usize, usize) {
        *self.annulus.get_or_insert_with(|| default_annulus(state.metric()))
    }

    pub fn record(&mut self, state: &FlowState) -> Result<DiagnosticsRecord> {
        let metric = state.metric();
        let grid = metric.grid();
        let n = metric.dim();
        let tau = metric.profile().tau;
        let window = self.config.window(grid.r_max());
        let curv = state.curvature();

        if self.heat.is_none() {
            if let Some(h) = self.config.heat {
                self.heat = Some(HeatField::envelope(metric, h.core * grid.r_min(), h.sigma)?);
            }
        }

        let mass = adm_mass(metric)?;
        let mass_rate_ladder = mass_ladder(grid.r_max())
            .into_iter()
            .map(|r| mass_rate_flux(state, r).map(|f| (r, f)))
            .collect::<Result<Vec<_>>>()?;
        let mass_rate = mass_rate_ladder.last().map_or(0.0, |p| p.1);
        let mu = asymptotic_volume_ratio(metric)?;
        let riem = decay_fit_window(grid, &curv.riem_norm, window.lo, window.hi)?;
        let scalar = decay_fit_window(grid, &curv.scalar, window.lo, window.hi)?;
        let l1 = l1_scalar_with(metric, curv, window)?;
        let spec = self.config.norm.unwrap_or_else(|| WeightedNormSpec::default_for(n, tau));
        let wkq = weighted_sobolev_norm(metric, &spec)?.value;
        let annulus = self.annulus(state);
        let total_scalar = total_scalar_sample_on(state, annulus)?;
        let r_vol = (self.config.volume_radius * grid.r_min()).min(grid.r_max());
        let volume = volume_sample(state, r_vol)?;

        let domd_exp = if mass_density_profile(metric)[grid.nodes_in(window.lo, window.hi)].iter().all(|&v| v == 0.0) {
            0.0
        } else {
            mass_density_decay(metric, window)?.exponent
        };
        let domd_at = super::residuals::mass_density_residual(metric, window.hi)?;
        let mut residuals = Residuals { mass_density: domd_at.abs(), mass_density_exp: domd_exp, ..Default::default() };
        if self.config.residuals {
            self.probe_residuals(state, &mut residuals)?;
        }

        let heat = match &self.heat {
            Some(h) => {
                let fit = decay_fit_window(grid, &h.u, window.lo, window.hi)?;
                Some(HeatRecord {
                    sup: h.sup(),
                    inf: h.inf(),
                    decay_exp: fit.exponent,
                    grad_sq_sup: gradient_norm_sq(metric, &h.u, SCALAR_INNER).into_iter().fold(0.0, f64::max),
                })
            }
            None => None,
        };

        Ok(DiagnosticsRecord {
            t: state.time(),
            step_count: state.step_count(),
            mass,
            mass_rate_flux: mass_rate,
            mass_rate_ladder,
            mu: mu.extrapolated,
            mu_uncertainty: mu.uncertainty,
            riem_decay_exp: riem.exponent,
            scalar_decay_exp: scalar.exponent,
            sup_riem: curv.sup_riem(),
            min_scalar: curv.scalar.iter().fold(f64::INFINITY, |m, &v| m.min(v)),
            l1_scalar: l1,
            wkq_norm: wkq,
            mtau_norm: wkq + l1.truncated,
            total_scalar,
            volume,
            residuals,
            heat,
        })
    }

    fn probe_residuals(&self, state: &FlowState, out: &mut Residuals) -> Result<()> {
        let dt = cfl_dt(state, self.config.cfl_safety)?;
        let next = step(state, dt)?;

        let live = state.metric().len().saturating_sub(PINNED_NODES);
        let scee = scalar_evolution_residual(state, &next, dt)?;
        out.scalar_evolution = scee[WALL_NODES.min(live)..live].iter().fold(0.0, |m, v| m.max(v.abs()));
        Ok(())
    }

    fn push(&mut self, record: DiagnosticsRecord) -> Result<()> {
        let records = &mut self.series.records;
        records.push(record);
        let len = records.len();
        if len >= 3 {
            let last = &records[len - 3..];
            let tot: Vec<TotalScalarSample> = last.iter().map(|r| r.total_scalar).collect();
            let vol: Vec<VolumeSample> = last.iter().map(|r| r.volume).collect();
            let (tot, vol) = (total_scalar_rate_profile(&tot)?, volume_rate_profile(&vol)?);
            // the first record keeps its forward value; interior ones become centered
            let first = if len == 3 { 0 } else { 1 };
            for k in first..3 {
                let res = &mut records[len - 3 + k].residuals;
                res.total_scalar_rate = tot[k];
                res.volume_rate = vol[k];
            }
        }
        Ok(())
    }
}

impl Observer for Recorder {
    fn observe(&mut self, state: &FlowState) -> Result<()> {
        let record = self.record(state)?;
        self.push(record)
    }

    fn on_step(&mut self, before: &FlowState, after: &FlowState, dt: f64) -> Result<()> {
        if let Some(h) = &self.heat {
            self.heat = Some(heat_step_between(h, before.metric(), after.metric(), dt)?);
        }
        let annulus = self.annulus(before);
        let r0 = match self.last_ricci_sq {
            Some(v) => v,
            None => total_scalar_sample_on(before, annulus)?.ricci_sq,
        };
        let r1 = total_scalar_sample_on(after, annulus)?.ricci_sq;
        self.series.ricci_sq_time_integral += 0.5 * dt * (r0 + r1);
        self.last_ricci_sq = Some(r1);
        Ok(())
    }
}
