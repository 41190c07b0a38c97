//! Experiment configuration, runs, refinement studies and their reports.

pub mod config;
pub mod family;
pub mod plot;
pub mod refine;
pub mod run;

pub use config::{
    annotated_toml, preset, ExperimentConfig, FamilyConfig, FlowConfig, GridConfig, OutputConfig, PRESETS,
};
pub use family::{family_continuity, FamilyMember, FamilyReport};
pub use plot::gnuplot_script;
pub use refine::{
    observed_order, refine, Level, LevelResult, Observable, Order, OrderTable, RefinementStudy, EXACT_FLOOR,
};
pub use run::{run, write_outputs, FailureRecord, RunOutcome, RunStatus, RunSummary};
