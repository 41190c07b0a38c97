//! File formats: metric snapshots (`r,a,b` CSV with a JSON sidecar),
//! checkpoints, and the diagnostics series CSV.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticsRecord, DiagnosticsSeries};
use crate::error::{Error, Result};
use crate::flow::{FlowLimits, FlowState, OuterAnchor};
use crate::geometry::{AsymptoticProfile, Compactification, RadialGrid, WarpedMetric};

/// Parameters that rebuild a grid node for node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub map: Compactification,
    pub nodes: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl GridSpec {
    pub fn of(grid: &RadialGrid) -> Self {
        Self { map: grid.map(), nodes: grid.len(), r_min: grid.r_min(), r_max: grid.r_max() }
    }

    pub fn build(&self) -> Result<RadialGrid> {
        RadialGrid::build(self.map, self.nodes, self.r_min, self.r_max)
    }
}

/// JSON sidecar of a snapshot. Only `n`, `gamma_order`, `tau` and `time`
/// are required; the deviations, when present, take precedence over the
/// CSV columns so that a round trip is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub n: usize,
    pub gamma_order: u32,
    pub tau: f64,
    pub time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub metric: WarpedMetric,
    pub time: f64,
}

/// `run/final.csv` -> `run/final.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// `run/final.csv` -> `run/final.state.json`.
pub fn checkpoint_state_path(csv: &Path) -> PathBuf {
    csv.with_extension("state.json")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_snapshot(path: &Path, metric: &WarpedMetric, time: f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["r", "a", "b"]).map_err(csv_err)?;
    for ((r, a), b) in metric.grid().radii().iter().zip(metric.a()).zip(metric.b()) {
        w.serialize((r, a, b)).map_err(csv_err)?;
    }
    w.flush()?;
    let profile = metric.profile();
    let meta = SnapshotMeta {
        n: metric.dim(),
        gamma_order: metric.gamma_order(),
        tau: profile.tau,
        time,
        q: profile.q,
        grid: Some(GridSpec::of(metric.grid())),
        alpha: Some(metric.alpha().to_vec()),
        beta: Some(metric.beta().to_vec()),
    };
    write_json(&sidecar_path(path), &meta)
}

fn read_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();
    if header != ["r", "a", "b"] {
        return Err(Error::Parse(format!("{}: expected header r,a,b, found {}", path.display(), header.join(","))));
    }
    let (mut r, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
    for row in rd.deserialize::<(f64, f64, f64)>() {
        let (ri, ai, bi) = row.map_err(csv_err)?;
        r.push(ri);
        a.push(ai);
        b.push(bi);
    }
    Ok((r, a, b))
}

fn grid_for(radii: &[f64], meta: &SnapshotMeta) -> Result<RadialGrid> {
    if let Some(spec) = meta.grid {
        let grid = spec.build()?;
        if grid.radii() == radii {
            return Ok(grid);
        }
        return RadialGrid::from_radii(radii, Some(spec.map));
    }
    RadialGrid::from_radii(radii, None)
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let (r, a, b) = read_columns(path)?;
    let meta: SnapshotMeta = read_json(&sidecar_path(path))?;
    let grid = Arc::new(grid_for(&r, &meta)?);
    let mut profile = AsymptoticProfile::new(meta.tau);
    profile.q = meta.q;
    let metric = match (meta.alpha, meta.beta) {
        (Some(alpha), Some(beta)) if alpha.len() == r.len() && beta.len() == r.len() => {
            WarpedMetric::from_deviations(meta.n, grid, alpha, beta, meta.gamma_order, profile)?
        }
        (None, None) => WarpedMetric::new(meta.n, grid, a, b, meta.gamma_order, profile)?,
        _ => return Err(Error::Parse(format!("{}: deviation arrays do not match the CSV", path.display()))),
    };
    Ok(Snapshot { metric, time: meta.time })
}

/// Scalar part of a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointState {
    pub t: f64,
    pub step_count: u64,
    /// Running supremum of `|Rm|`.
    #[serde(rename = "K")]
    pub k: f64,
    pub limits: FlowLimits,
    pub anchor: OuterAnchor,
}

pub fn write_checkpoint(path: &Path, state: &FlowState) -> Result<()> {
    write_snapshot(path, state.metric(), state.time())?;
    let scalars = CheckpointState {
        t: state.time(),
        step_count: state.step_count(),
        k: state.max_curv(),
        limits: *state.limits(),
        anchor: state.anchor().clone(),
    };
    write_json(&checkpoint_state_path(path), &scalars)
}

pub fn read_checkpoint(path: &Path) -> Result<FlowState> {
    let snap = read_snapshot(path)?;
    let s: CheckpointState = read_json(&checkpoint_state_path(path))?;
    FlowState::restore(snap.metric, s.t, s.step_count, s.k, s.limits, s.anchor)
}

/// Column order of the diagnostics series CSV.
pub const SERIES_COLUMNS: [&str; 14] = [
    "t",
    "mass",
    "mass_unc",
    "mass_rate",
    "mu",
    "riem_exp",
    "scalar_exp",
    "l1R",
    "wkq",
    "mtau",
    "res_scee",
    "res_vol",
    "res_totR",
    "res_domd",
];

pub fn series_row(r: &DiagnosticsRecord) -> [f64; 14] {
    [
        r.t,
        r.mass.extrapolated,
        r.mass.uncertainty,
        r.mass_rate_flux,
        r.mu,
        r.riem_decay_exp,
        r.scalar_decay_exp,
        r.l1_scalar.truncated,
        r.wkq_norm,
        r.mtau_norm,
        r.residuals.scalar_evolution,
        r.residuals.volume_rate,
        r.residuals.total_scalar_rate,
        r.residuals.mass_density,
    ]
}

pub fn write_series_csv<W: std::io::Write>(out: W, series: &DiagnosticsSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_COLUMNS).map_err(csv_err)?;
    for rec in &series.records {
        w.serialize(series_row(rec)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_csv(path: &Path) -> Result<Vec<[f64; 14]>> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<&str> = rd.headers().map_err(csv_err)?.iter().collect();
    if header != SERIES_COLUMNS {
        return Err(Error::Parse(format!("{}: unexpected series header", path.display())));
    }
    rd.deserialize().map(|row| row.map_err(csv_err)).collect()
}
