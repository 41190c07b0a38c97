use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticsConfig, HeatConfig};
use crate::error::{Error, Result};
use crate::geometry::grid::{MIN_NODES, MIN_RANGE};
use crate::geometry::RadialGrid;
use crate::initialdata::{InitialDataSpec, InitialKind, MAX_DIMENSION};

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 5] = ["flat", "schwarzschild", "ale-quotient", "bump-tau1-q5", "convergence-family"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nodes: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Compactification length `L` in `x = r/(r+L)`.
    pub scale: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { nodes: 2048, r_min: 1.0, r_max: 1e4, scale: 30.0 }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::compactified(self.nodes, self.r_min, self.r_max, self.scale)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub t_final: f64,
    pub cfl_safety: f64,
    pub record_every: usize,
    /// Blow-up threshold as a multiple of the initial `sup|Rm|`.
    pub blowup_factor: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { t_final: 0.5, cfl_safety: 0.5, record_every: 500, blowup_factor: 1000.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Write the final state as a restartable checkpoint.
    pub checkpoint: bool,
    /// Write `plot.gp` next to the series.
    pub gnuplot: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), checkpoint: true, gnuplot: false }
    }
}

/// Static mass-continuity check over the members `k = 0..members` of the
/// convergent family built from `initial`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub members: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub initial: InitialDataSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        preset("bump-tau1-q5").expect("built-in preset")
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let i = &self.initial;
        if !(3..=MAX_DIMENSION).contains(&i.n) {
            return bad(format!("initial.n = {} outside 3..={MAX_DIMENSION}", i.n));
        }
        if i.gamma_order == 0 {
            return bad("initial.gamma_order must be >= 1".into());
        }
        if !i.amplitude.is_finite() {
            return bad("initial.amplitude must be finite".into());
        }
        if i.tau.is_some_and(|t| !(t > 0.0)) {
            return bad("initial.tau must be positive".into());
        }
        let g = &self.grid;
        if g.nodes < MIN_NODES {
            return bad(format!("grid.nodes = {} below {MIN_NODES}", g.nodes));
        }
        if !(g.r_min > 0.0 && g.r_max.is_finite() && g.r_max / g.r_min >= MIN_RANGE) {
            return bad(format!("grid needs 0 < r_min and r_max/r_min >= {MIN_RANGE}"));
        }
        if !(g.scale > 0.0 && g.scale.is_finite()) {
            return bad("grid.scale must be positive".into());
        }
        let f = &self.flow;
        if !(f.t_final > 0.0 && f.t_final.is_finite()) {
            return bad("flow.t_final must be positive".into());
        }
        if !(f.cfl_safety > 0.0 && f.cfl_safety <= 1.0) {
            return bad(format!("flow.cfl_safety = {} outside (0, 1]", f.cfl_safety));
        }
        if f.record_every == 0 {
            return bad("flow.record_every must be >= 1".into());
        }
        if !(f.blowup_factor > 0.0) {
            return bad("flow.blowup_factor must be positive".into());
        }
        let [lo, hi] = self.diagnostics.fit_window;
        if !(lo > 0.0 && hi > lo && hi <= 1.0) {
            return bad(format!("diagnostics.fit_window = [{lo}, {hi}] must satisfy 0 < lo < hi <= 1"));
        }
        if let Some(spec) = self.diagnostics.norm {
            crate::diagnostics::WeightedNormSpec::new(spec.k, spec.q_exp, spec.tau)
                .map_err(|e| Error::Config(format!("diagnostics.norm: {e}")))?;
        }
        if !(self.diagnostics.volume_radius > 0.0) {
            return bad("diagnostics.volume_radius must be positive".into());
        }
        if let Some(h) = self.diagnostics.heat {
            if !(h.core > 0.0 && h.sigma > 0.0) {
                return bad("diagnostics.heat needs positive core and sigma".into());
            }
        }
        if let Some(fam) = self.family {
            if fam.members < 2 {
                return bad("family.members must be >= 2".into());
            }
        }
        Ok(())
    }
}

fn base(name: &str, initial: InitialDataSpec) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        initial,
        grid: GridConfig::default(),
        flow: FlowConfig::default(),
        diagnostics: DiagnosticsConfig::default(),
        output: OutputConfig { directory: PathBuf::from(format!("out/{name}")), ..Default::default() },
        family: None,
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let bump = InitialDataSpec::conformal_bump(3, 0.5, Some(5.0));
    let config = match name {
        "flat" => {
            let mut c = base(name, InitialDataSpec::flat(3));
            c.grid.nodes = 512;
            c.flow.t_final = 1.0;
            c
        }
        "schwarzschild" => base(name, InitialDataSpec::schwarzschild(3, 1.0)),
        "ale-quotient" => base(name, bump.with_gamma(2)),
        "bump-tau1-q5" => {
            let mut c = base(name, bump);
            c.diagnostics.heat = Some(HeatConfig::default());
            c
        }
        "convergence-family" => {
            let spec = InitialDataSpec { kind: InitialKind::ConvergentFamilyMember, ..bump };
            let mut c = base(name, spec);
            c.flow.t_final = 0.1;
            c.family = Some(FamilyConfig { members: 7 });
            c
        }
        other => return Err(Error::Config(format!("unknown preset {other:?}; known: {}", PRESETS.join(", ")))),
    };
    Ok(config)
}

const KEY_DOCS: &[(&str, &str)] = &[
    ("name", "label copied into the summary"),
    ("kind", "flat | schwarzschild_slice | conformal_bump | perturbed_flat | convergent_family_member"),
    ("n", "dimension, 3..=6"),
    ("amplitude", "mass for schwarzschild_slice, conformal amplitude for bumps, log-amplitude for perturbed_flat"),
    ("q", "scalar-curvature decay exponent of the bump's second term"),
    ("tau", "asymptotic order; derived from the data when absent"),
    ("gamma_order", "order of the quotient group, 1 for AE"),
    ("seed", "RNG seed of perturbed_flat"),
    ("family_index", "member k of the convergent family; absent means the limit"),
    ("nodes", "grid nodes, uniform in x = r/(r+scale)"),
    ("r_min", "inner radius"),
    ("r_max", "outer radius, at least 1000 r_min"),
    ("scale", "compactification length"),
    ("t_final", "flow time to reach"),
    ("cfl_safety", "fraction of the explicit stability limit used as time step"),
    ("record_every", "steps between diagnostic records"),
    ("blowup_factor", "abort when sup|Rm| exceeds this multiple of its initial value"),
    ("fit_window", "decay-fit window as fractions of r_max"),
    ("volume_radius", "ball radius of the volume-rate residual, in units of r_min"),
    ("residuals", "take a probe step at each record for the scalar evolution residual"),
    ("core", "heat envelope core radius, in units of r_min"),
    ("sigma", "heat envelope decay exponent"),
    ("k", "derivative count of the weighted norm"),
    ("q_exp", "integrability exponent of the weighted norm"),
    ("directory", "output directory, created if missing"),
    ("checkpoint", "write the final state as a restartable checkpoint"),
    ("gnuplot", "write plot.gp next to series.csv"),
    ("members", "family members k = 0..members checked for mass continuity"),
];

/// `config` as TOML with every key annotated.
pub fn annotated_toml(config: &ExperimentConfig) -> Result<String> {
    let text = config.to_toml()?;
    let mut out = String::from("# rfmass experiment configuration\n");
    out.push_str(&format!("# presets: {}\n", PRESETS.join(", ")));
    out.push_str("# [diagnostics.heat] enables the heat solution; [diagnostics.norm] overrides k = 1, q = 2\n\n");
    for line in text.lines() {
        let key = line.split('=').next().unwrap_or("").trim();
        match KEY_DOCS.iter().find(|(k, _)| *k == key) {
            Some((_, doc)) if line.contains('=') => out.push_str(&format!("{line:<32} # {doc}\n")),
            _ => {
                out.push_str(line);
                out.push('\n');
            }
        }
    }
    Ok(out)
}
