use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::family::{family_continuity, FamilyReport};
use super::plot::gnuplot_script;
use crate::diagnostics::{DiagnosticsSeries, Recorder};
use crate::error::{Error, Result};
use crate::flow::{evolve, EvolveOptions, FlowState};
use crate::initialdata::build;
use crate::io::{write_checkpoint, write_json, write_series_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    CurvatureBlowUp,
    AsymptoticsViolated,
    Failed,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Completed => 0,
            Self::Failed => 1,
            Self::CurvatureBlowUp => 2,
            Self::AsymptoticsViolated => 3,
        }
    }

    fn of(error: &Error) -> Self {
        match error {
            Error::CurvatureBlowUp { .. } => Self::CurvatureBlowUp,
            Error::AsymptoticsViolated { .. } => Self::AsymptoticsViolated,
            _ => Self::Failed,
        }
    }
}

/// Why and where a run stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub status: RunStatus,
    pub message: String,
    pub t: f64,
    pub step_count: u64,
    pub records_written: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassSummary {
    pub initial: f64,
    pub last: f64,
    /// `max_t |m(t) - m(0)|`.
    pub drift: f64,
    pub drift_relative: f64,
    pub max_uncertainty: f64,
    pub extrapolation_exponent: f64,
    pub expected: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassRateSummary {
    pub samples: usize,
    pub agreeing: usize,
    pub max_abs_difference: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualMaxima {
    pub scalar_evolution: f64,
    /// Rate residuals need three records; `None` for shorter runs.
    pub volume_rate: Option<f64>,
    pub total_scalar_rate: Option<f64>,
    pub mass_density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatSummary {
    pub min_decay_exp: f64,
    pub grad_sq_non_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub version: String,
    pub status: RunStatus,
    pub t_reached: f64,
    pub steps: u64,
    pub records: usize,
    pub nodes: usize,
    pub ladder_radii: Vec<f64>,
    pub mass: Option<MassSummary>,
    pub mass_rate: MassRateSummary,
    pub mu_initial: Option<f64>,
    pub mu_drift: f64,
    pub min_riem_exp: f64,
    pub min_scalar_exp: f64,
    pub l1_certified: bool,
    pub max_l1: f64,
    /// Truncated `∫∫ |Rc|^2` over the annulus and the run.
    pub ricci_sq_time_integral: f64,
    pub max_sup_riem: f64,
    pub residuals: ResidualMaxima,
    pub heat: Option<HeatSummary>,
    pub family: Option<FamilyReport>,
    pub failure: Option<FailureRecord>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub series: DiagnosticsSeries,
    pub final_state: FlowState,
    pub summary: RunSummary,
    pub failure: Option<FailureRecord>,
}

/// Build the initial metric, evolve it with the full recorder, and
/// summarize. Flow failures come back as an outcome with a failure record;
/// only invalid configurations and unbuildable data are errors.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let grid = config.grid.build()?;
    let family = match config.family {
        Some(f) => Some(family_continuity(&config.initial, grid.clone(), f.members)?),
        None => None,
    };
    let metric = build(&config.initial, grid)?;
    let state = FlowState::new(metric, config.flow.blowup_factor)?;
    let mut diag = config.diagnostics.clone();
    diag.cfl_safety = config.flow.cfl_safety;
    let mut recorder = Recorder::new(diag);
    let options = EvolveOptions {
        t_final: config.flow.t_final,
        cfl_safety: config.flow.cfl_safety,
        record_every: config.flow.record_every,
    };
    let (final_state, failure) = match evolve(state, &options, &mut recorder) {
        Ok(state) => (state, None),
        Err(f) => {
            let status = RunStatus::of(&f.error);
            let record = FailureRecord {
                status,
                message: f.error.to_string(),
                t: f.state.time(),
                step_count: f.state.step_count(),
                records_written: recorder.series().records.len(),
            };
            (f.state, Some(record))
        }
    };
    let status = failure.as_ref().map_or(RunStatus::Completed, |f| f.status);
    let series = recorder.into_series();
    let summary = summarize(config, status, &series, &final_state, family, failure.clone());
    Ok(RunOutcome { status, series, final_state, summary, failure })
}

fn summarize(
    config: &ExperimentConfig,
    status: RunStatus,
    series: &DiagnosticsSeries,
    state: &FlowState,
    family: Option<FamilyReport>,
    failure: Option<FailureRecord>,
) -> RunSummary {
    let recs = &series.records;
    let min = |f: &dyn Fn(usize) -> f64| (0..recs.len()).map(f).fold(f64::INFINITY, f64::min);
    let max = |f: &dyn Fn(usize) -> f64| (0..recs.len()).map(f).fold(0.0, f64::max);
    let mass = recs.first().map(|first| {
        let m0 = first.mass.extrapolated;
        let drift = series.mass_drift();
        MassSummary {
            initial: m0,
            last: recs.last().map_or(m0, |r| r.mass.extrapolated),
            drift,
            drift_relative: drift / m0.abs().max(1.0),
            max_uncertainty: max(&|i| recs[i].mass.uncertainty),
            extrapolation_exponent: first.mass.extrapolation_exponent,
            expected: config.initial.expected_mass(),
        }
    });
    let rates = series.mass_rate_comparison();
    let rated = recs.len() >= 3;
    let heat = recs.first().and_then(|r| r.heat).map(|_| {
        let heat: Vec<_> = recs.iter().filter_map(|r| r.heat).collect();
        HeatSummary {
            min_decay_exp: heat.iter().map(|h| h.decay_exp).fold(f64::INFINITY, f64::min),
            grad_sq_non_increasing: heat.windows(2).all(|w| w[1].grad_sq_sup <= w[0].grad_sq_sup),
        }
    });
    RunSummary {
        name: config.name.clone(),
        version: env!("CARGO_PKG_VERSION").into(),
        status,
        t_reached: state.time(),
        steps: state.step_count(),
        records: recs.len(),
        nodes: config.grid.nodes,
        ladder_radii: recs.first().map_or_else(Vec::new, |r| r.mass.flux_at_radius.iter().map(|p| p.0).collect()),
        mass,
        mass_rate: MassRateSummary {
            samples: rates.len(),
            agreeing: rates.iter().filter(|s| s.agrees()).count(),
            max_abs_difference: rates.iter().map(|s| (s.by_difference - s.flux).abs()).fold(0.0, f64::max),
        },
        mu_initial: recs.first().map(|r| r.mu),
        mu_drift: series.mu_drift(),
        min_riem_exp: min(&|i| recs[i].riem_decay_exp),
        min_scalar_exp: min(&|i| recs[i].scalar_decay_exp),
        l1_certified: recs.iter().all(|r| !r.l1_scalar.tail_divergent),
        max_l1: max(&|i| recs[i].l1_scalar.truncated),
        ricci_sq_time_integral: series.ricci_sq_time_integral,
        max_sup_riem: state.max_curv(),
        residuals: ResidualMaxima {
            scalar_evolution: max(&|i| recs[i].residuals.scalar_evolution.abs()),
            volume_rate: rated.then(|| max(&|i| recs[i].residuals.volume_rate.abs())),
            total_scalar_rate: rated.then(|| max(&|i| recs[i].residuals.total_scalar_rate.abs())),
            mass_density: max(&|i| recs[i].residuals.mass_density.abs()),
        },
        heat,
        family,
        failure,
    }
}

/// `series.csv`, `summary.json`, the final checkpoint (`final.csv` plus
/// sidecars), `failure.json` when the run stopped early, and optionally
/// `plot.gp`.
pub fn write_outputs(config: &ExperimentConfig, outcome: &RunOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let csv = fs::File::create(dir.join("series.csv"))?;
    write_series_csv(std::io::BufWriter::new(csv), &outcome.series)?;
    write_json(&dir.join("summary.json"), &outcome.summary)?;
    let failure_path = dir.join("failure.json");
    match &outcome.failure {
        Some(f) => write_json(&failure_path, f)?,
        None if failure_path.exists() => fs::remove_file(&failure_path)?,
        None => {}
    }
    if config.output.checkpoint {
        write_checkpoint(&dir.join("final.csv"), &outcome.final_state)?;
    }
    if config.output.gnuplot {
        fs::write(dir.join("plot.gp"), gnuplot_script("series.csv"))?;
    }
    fs::write(dir.join("config.toml"), config.to_toml()?)?;
    Ok(())
}
