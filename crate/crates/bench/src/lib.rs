//! Scenario runner for the global-local coupling solvers: configuration
//! loading, engine sweeps, and CSV/JSON reporting.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{load_config, parse_config, Mode, Overrides, ScenarioConfig};
pub use report::{emit_report, history_csv, results_csv, summary_json};
pub use runner::{run_scenario, run_scenario_on, ResultRow, ScenarioOutcome};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] glc_core::Error),
}
