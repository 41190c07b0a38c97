use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{preset, ExperimentConfig};
use super::run::{run, write_outputs, RunOutcome, RunStatus};
use crate::error::{Error, Result};

/// Values at or below this are treated as rounding and reported as exact.
pub const EXACT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "mass_drift")]
    MassDrift,
    #[serde(rename = "mu_drift")]
    MuDrift,
    #[serde(rename = "res_scee")]
    ScalarEvolution,
    #[serde(rename = "res_vol")]
    VolumeRate,
    #[serde(rename = "res_totR")]
    TotalScalarRate,
    #[serde(rename = "res_domd")]
    MassDensity,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Self::MassDrift,
        Self::MuDrift,
        Self::ScalarEvolution,
        Self::VolumeRate,
        Self::TotalScalarRate,
        Self::MassDensity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::MassDrift => "mass_drift",
            Self::MuDrift => "mu_drift",
            Self::ScalarEvolution => "res_scee",
            Self::VolumeRate => "res_vol",
            Self::TotalScalarRate => "res_totR",
            Self::MassDensity => "res_domd",
        }
    }

    pub fn measure(self, outcome: &RunOutcome) -> f64 {
        let s = &outcome.summary;
        match self {
            Self::MassDrift => s.mass.map_or(f64::NAN, |m| m.drift),
            Self::MuDrift => s.mu_drift,
            Self::ScalarEvolution => s.residuals.scalar_evolution,
            Self::VolumeRate => s.residuals.volume_rate.unwrap_or(f64::NAN),
            Self::TotalScalarRate => s.residuals.total_scalar_rate.unwrap_or(f64::NAN),
            Self::MassDensity => s.residuals.mass_density,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    pub nodes_multiplier: usize,
    /// Multiplies the CFL safety factor, on top of the `h^2` scaling of the step.
    #[serde(default = "unit")]
    pub dt_multiplier: f64,
}

fn unit() -> f64 {
    1.0
}

/// Levels of a convergence study around one base experiment. The base is a
/// full configuration or the name of a preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementStudy {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<ExperimentConfig>,
    pub levels: Vec<Level>,
    pub observables: Vec<Observable>,
}

impl RefinementStudy {
    pub fn from_toml(text: &str) -> Result<Self> {
        let study: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        study.validate()?;
        Ok(study)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn base_config(&self) -> Result<ExperimentConfig> {
        match (&self.preset, &self.base) {
            (Some(name), None) => preset(name),
            (None, Some(base)) => Ok(base.clone()),
            _ => Err(Error::Config("a study needs exactly one of `preset` and `base`".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base_config()?.validate()?;
        if self.levels.len() < 3 {
            return Err(Error::Config(format!("a study needs >= 3 levels, got {}", self.levels.len())));
        }
        if self.observables.is_empty() {
            return Err(Error::Config("a study needs at least one observable".into()));
        }
        for l in &self.levels {
            if l.nodes_multiplier == 0 || !(l.dt_multiplier > 0.0) {
                return Err(Error::Config("level multipliers must be positive".into()));
            }
        }
        for w in self.levels.windows(2) {
            if !(w[1].nodes_multiplier > w[0].nodes_multiplier && w[1].dt_multiplier <= w[0].dt_multiplier) {
                return Err(Error::Config("levels must strictly refine the grid and not coarsen the step".into()));
            }
        }
        Ok(())
    }

    /// Configuration of level `k`; its outputs go to `level-k` under the base directory.
    pub fn level_config(&self, k: usize) -> Result<ExperimentConfig> {
        let mut c = self.base_config()?;
        let level = self.levels[k];
        c.grid.nodes *= level.nodes_multiplier;
        c.flow.cfl_safety *= level.dt_multiplier;
        c.output.directory = c.output.directory.join(format!("level-{k}"));
        c.name = format!("{}-level-{k}", c.name);
        Ok(c)
    }
}

/// Observed order between two successive levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// Both values at rounding level.
    Exact,
    Observed(f64),
    /// A level failed or produced no value.
    Unavailable,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact => write!(f, "exact"),
            Self::Observed(p) => write!(f, "{p:.2}"),
            Self::Unavailable => write!(f, "n/a"),
        }
    }
}

/// `log(e_k / e_{k+1}) / log(h_k / h_{k+1})`.
pub fn observed_order(coarse: f64, fine: f64, refinement: f64) -> Order {
    if !(coarse.is_finite() && fine.is_finite()) {
        return Order::Unavailable;
    }
    let (c, f) = (coarse.abs(), fine.abs());
    if c <= EXACT_FLOOR && f <= EXACT_FLOOR {
        return Order::Exact;
    }
    Order::Observed((c / f.max(f64::MIN_POSITIVE)).ln() / refinement.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub nodes: usize,
    pub cfl_safety: f64,
    pub status: RunStatus,
    pub message: Option<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderTable {
    pub observables: Vec<Observable>,
    pub levels: Vec<LevelResult>,
    /// `orders[j][k]`: observable `j` between levels `k` and `k + 1`.
    pub orders: Vec<Vec<Order>>,
}

impl OrderTable {
    pub fn min_order(&self, observable: Observable) -> Option<Order> {
        let j = self.observables.iter().position(|&o| o == observable)?;
        self.orders[j].iter().copied().reduce(|a, b| match (a, b) {
            (Order::Unavailable, _) | (_, Order::Unavailable) => Order::Unavailable,
            (Order::Exact, o) | (o, Order::Exact) => o,
            (Order::Observed(x), Order::Observed(y)) => Order::Observed(x.min(y)),
        })
    }
}

impl fmt::Display for OrderTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>8} {:>8}", "nodes", "cfl")?;
        for o in &self.observables {
            write!(f, " {:>12} {:>6}", o.name(), "order")?;
        }
        writeln!(f)?;
        for (k, level) in self.levels.iter().enumerate() {
            write!(f, "{:>8} {:>8.4}", level.nodes, level.cfl_safety)?;
            for (j, v) in level.values.iter().enumerate() {
                let order = if k == 0 { String::from("-") } else { self.orders[j][k - 1].to_string() };
                write!(f, " {v:>12.4e} {order:>6}")?;
            }
            if let Some(msg) = &level.message {
                write!(f, "  [{msg}]")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Run every level (concurrently), measure the observables and their
/// successive orders. Failed levels stay in the table with NaN values.
/// With `write` set, each level's outputs go to its own directory.
pub fn refine(study: &RefinementStudy, write: bool) -> Result<OrderTable> {
    study.validate()?;
    let configs = (0..study.levels.len()).map(|k| study.level_config(k)).collect::<Result<Vec<_>>>()?;
    let outcomes: Vec<Result<RunOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs.iter().map(|c| scope.spawn(move || run(c))).collect();
        handles.into_iter().map(|h| h.join().expect("level thread panicked")).collect()
    });
    let mut levels = Vec::with_capacity(configs.len());
    for (config, outcome) in configs.iter().zip(outcomes) {
        let result = match outcome {
            Ok(outcome) => {
                if write {
                    write_outputs(config, &outcome, &config.output.directory)?;
                }
                let values = if outcome.status == RunStatus::Completed {
                    study.observables.iter().map(|o| o.measure(&outcome)).collect()
                } else {
                    vec![f64::NAN; study.observables.len()]
                };
                LevelResult {
                    nodes: config.grid.nodes,
                    cfl_safety: config.flow.cfl_safety,
                    status: outcome.status,
                    message: outcome.failure.as_ref().map(|f| f.message.clone()),
                    values,
                }
            }
            Err(e) => LevelResult {
                nodes: config.grid.nodes,
                cfl_safety: config.flow.cfl_safety,
                status: RunStatus::Failed,
                message: Some(e.to_string()),
                values: vec![f64::NAN; study.observables.len()],
            },
        };
        levels.push(result);
    }
    let orders = (0..study.observables.len())
        .map(|j| {
            levels
                .windows(2)
                .map(|w| observed_order(w[0].values[j], w[1].values[j], w[1].nodes as f64 / w[0].nodes as f64))
                .collect()
        })
        .collect();
    Ok(OrderTable { observables: study.observables.clone(), levels, orders })
}
