//! Scenario execution: builds the coupled problem once, runs the requested
//! engines and sweeps against it, and gathers result rows plus per-run
//! convergence histories.

use std::sync::Arc;

use glc_core::coupling::CouplingProblem;
use glc_core::engines::{
    run_aitken, run_async, run_sync, IterationSample, RunRecord,
};
use glc_core::error::Error as CoreError;
use nalgebra::DVector;
use serde::Serialize;

use crate::config::{Mode, ScenarioConfig};
use crate::BenchError;

/// One completed (or failed) run.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    pub mode: String,
    pub omega: f64,
    pub it_global: usize,
    pub it_fine_min: usize,
    pub it_fine_max: usize,
    pub wall_ms: f64,
    pub rel_residual: f64,
    /// Relative trace error against the reference oracle, when computed.
    pub rel_error: Option<f64>,
    pub converged: bool,
    /// Workers used (async modes; 1 otherwise).
    pub workers: usize,
    pub run_id: String,
}

/// Everything a scenario produced.
#[derive(Debug)]
pub struct ScenarioOutcome {
    pub rows: Vec<ResultRow>,
    /// Per run: identifier and the residual history.
    pub histories: Vec<(String, Vec<IterationSample>)>,
    /// Hash of the assembled operators, identical for every run of the
    /// scenario.
    pub problem_fingerprint: String,
    /// Final interface trace per run (row order), for cross-run comparisons.
    pub final_traces: Vec<DVector<f64>>,
    pub reference_computed: bool,
}

/// Builds the problem once and runs every `(mode, omega, workers)`
/// combination against that one instance.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, BenchError> {
    cfg.validate()?;
    let problem = Arc::new(cfg.layout().build_problem().map_err(BenchError::Core)?);
    run_scenario_on(cfg, &problem)
}

/// Runs a validated scenario against an existing problem instance.
pub fn run_scenario_on(
    cfg: &ScenarioConfig,
    problem: &Arc<CouplingProblem>,
) -> Result<ScenarioOutcome, BenchError> {
    let fingerprint = format!("{:016x}", problem.fingerprint());

    let reference = if problem.total_dofs() <= cfg.oracle_cap {
        Some(
            problem
                .reference_solve()
                .map_err(BenchError::Core)?
                .trace
                .clone(),
        )
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut histories = Vec::new();
    let mut final_traces = Vec::new();

    for &mode in &cfg.modes {
        for &omega in &cfg.omegas {
            let worker_counts: Vec<usize> = match mode {
                Mode::Async => cfg
                    .workers_list
                    .iter()
                    .map(|&w| if w == 0 { problem.n_patches() } else { w })
                    .collect(),
                _ => vec![1],
            };
            for workers in worker_counts {
                let run_id = run_identifier(cfg, mode, omega, workers);
                let outcome = match mode {
                    Mode::Sync => run_sync(problem, omega, cfg.tol, cfg.max_iters),
                    Mode::Aitken => run_aitken(problem, omega, cfg.tol, cfg.max_iters),
                    Mode::Async => run_async(
                        problem,
                        omega,
                        cfg.tol,
                        cfg.max_iters,
                        &cfg.delay_schedule(),
                        workers,
                        cfg.backend,
                    ),
                };
                let record = match outcome {
                    Ok(record) => record,
                    // A diverged run becomes a row, not a crash.
                    Err(CoreError::Diverged { record, .. }) => *record,
                    Err(err) => return Err(BenchError::Core(err)),
                };
                rows.push(row_from_record(cfg, mode, omega, workers, &run_id, &record, reference.as_ref()));
                histories.push((run_id, record.history.clone()));
                final_traces.push(record.final_trace.clone());
            }
        }
    }

    Ok(ScenarioOutcome {
        rows,
        histories,
        problem_fingerprint: fingerprint,
        final_traces,
        reference_computed: reference.is_some(),
    })
}

fn run_identifier(cfg: &ScenarioConfig, mode: Mode, omega: f64, workers: usize) -> String {
    match mode {
        Mode::Async => format!(
            "{}_{}_omega{}_w{}_seed{}",
            cfg.id,
            mode.as_str(),
            omega,
            workers,
            cfg.seed
        ),
        _ => format!("{}_{}_omega{}", cfg.id, mode.as_str(), omega),
    }
}

fn row_from_record(
    cfg: &ScenarioConfig,
    mode: Mode,
    omega: f64,
    workers: usize,
    run_id: &str,
    record: &RunRecord,
    reference: Option<&DVector<f64>>,
) -> ResultRow {
    let rel_error = reference.map(|u_ref| {
        (&record.final_trace - u_ref).norm() / u_ref.norm().max(f64::MIN_POSITIVE)
    });
    ResultRow {
        scenario: cfg.id.clone(),
        mode: mode.as_str().to_string(),
        omega,
        it_global: record.it_global,
        it_fine_min: record.it_fine_min(),
        it_fine_max: record.it_fine_max(),
        wall_ms: record.wall_ms,
        rel_residual: record.final_relative_residual,
        rel_error,
        converged: record.converged(),
        workers,
        run_id: run_id.to_string(),
    }
}
