use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;

use rfmass::diagnostics::{
    adm_mass, asymptotic_volume_ratio, decay_fit_window, hawking_mass, l1_scalar, mass_density_decay,
    weighted_sobolev_norm, FitWindow, L1Scalar, MassEstimate, VolumeRatio, WeightedNormSpec,
};
use rfmass::geometry::curvature_of;
use rfmass::harness::{
    annotated_toml, gnuplot_script, preset, refine, run, write_outputs, ExperimentConfig, RefinementStudy,
};
use rfmass::io::read_snapshot;
use rfmass::Error;

const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(
    name = "rfmass",
    version,
    about = "Ricci flow of rotationally symmetric AE/ALE metrics with ADM mass diagnostics"
)]
struct Cli {
    /// Print the annotated default configuration (or the named preset) and exit.
    #[arg(long, value_name = "PRESET", num_args = 0..=1, default_missing_value = "bump-tau1-q5")]
    print_defaults: Option<String>,
    /// Write a gnuplot script for the series CSV to this path (or next to a run's outputs).
    #[arg(long, value_name = "PATH", global = true)]
    gnuplot_script: Option<Option<PathBuf>>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one experiment and write series.csv, summary.json and a checkpoint.
    Run {
        config: PathBuf,
        /// Overrides output.directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a refinement study and print the order table.
    Refine {
        study: PathBuf,
        /// Also write every level's outputs.
        #[arg(long)]
        write: bool,
    },
    /// Static diagnostics of a stored metric snapshot.
    Mass { snapshot: PathBuf },
}

#[derive(Serialize)]
struct StaticReport {
    n: usize,
    gamma_order: u32,
    tau: f64,
    time: f64,
    mass: MassEstimate,
    hawking_mass_at_top: Option<f64>,
    volume_ratio: VolumeRatio,
    riem_decay_exp: f64,
    scalar_decay_exp: f64,
    mass_density_exp: f64,
    l1_scalar: L1Scalar,
    weighted_norm: f64,
}

fn static_report(path: &Path) -> anyhow::Result<StaticReport> {
    let snap = read_snapshot(path).with_context(|| format!("reading {}", path.display()))?;
    let m = &snap.metric;
    let grid = m.grid();
    let window = FitWindow::outer_decade(grid.r_max());
    let curv = curvature_of(m)?;
    let mass = adm_mass(m)?;
    let top = mass.flux_at_radius.last().map(|p| p.0);
    let tau = m.profile().tau;
    Ok(StaticReport {
        n: m.dim(),
        gamma_order: m.gamma_order(),
        tau,
        time: snap.time,
        hawking_mass_at_top: match (m.dim(), top) {
            (3, Some(r)) => Some(hawking_mass(m, r)?),
            _ => None,
        },
        mass,
        volume_ratio: asymptotic_volume_ratio(m)?,
        riem_decay_exp: decay_fit_window(grid, &curv.riem_norm, window.lo, window.hi)?.exponent,
        scalar_decay_exp: decay_fit_window(grid, &curv.scalar, window.lo, window.hi)?.exponent,
        mass_density_exp: mass_density_decay(m, window).map_or(f64::NAN, |f| f.exponent),
        l1_scalar: l1_scalar(m)?,
        weighted_norm: weighted_sobolev_norm(m, &WeightedNormSpec::default_for(m.dim(), tau))?.value,
    })
}

fn is_config_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(
            c.downcast_ref::<Error>(),
            Some(
                Error::Config(_)
                    | Error::Parse(_)
                    | Error::AmplitudeTooLarge(_)
                    | Error::InvalidGrid(_)
                    | Error::GridTooCoarse { .. }
                    | Error::UnsupportedDimension(_)
            )
        )
    })
}

fn execute(cli: Cli) -> anyhow::Result<u8> {
    if let Some(name) = &cli.print_defaults {
        print!("{}", annotated_toml(&preset(name)?)?);
        return Ok(0);
    }
    let wants_script = cli.gnuplot_script.is_some();
    let script_path = cli.gnuplot_script.flatten();
    match cli.command {
        Some(Command::Run { config, output }) => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(dir) = output {
                config.output.directory = dir;
            }
            config.output.gnuplot |= wants_script && script_path.is_none();
            let outcome = run(&config)?;
            let dir = &config.output.directory;
            write_outputs(&config, &outcome, dir).with_context(|| format!("writing outputs to {}", dir.display()))?;
            if let Some(path) = script_path {
                std::fs::write(&path, gnuplot_script(&dir.join("series.csv").to_string_lossy()))?;
            }
            println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
            if let Some(f) = &outcome.failure {
                eprintln!("run stopped: {}", f.message);
            }
            Ok(outcome.status.exit_code() as u8)
        }
        Some(Command::Refine { study, write }) => {
            let study = RefinementStudy::load(&study)?;
            let table = refine(&study, write)?;
            print!("{table}");
            Ok(0)
        }
        Some(Command::Mass { snapshot }) => {
            println!("{}", serde_json::to_string_pretty(&static_report(&snapshot)?)?);
            Ok(0)
        }
        None => match script_path {
            Some(path) => {
                std::fs::write(&path, gnuplot_script("series.csv"))?;
                Ok(0)
            }
            None if wants_script => {
                print!("{}", gnuplot_script("series.csv"));
                Ok(0)
            }
            None => {
                eprintln!("nothing to do; see --help");
                Ok(EXIT_CONFIG)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_config_error(&e) { EXIT_CONFIG } else { 1 })
        }
    }
}
