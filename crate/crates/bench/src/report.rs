//! Result emission: results CSV, per-run convergence-history CSVs, and a
//! JSON summary mirroring both.

use std::io::Write;
use std::path::{Path, PathBuf};

use glc_core::engines::IterationSample;
use serde::Serialize;

use crate::runner::{ResultRow, ScenarioOutcome};
use crate::BenchError;

pub const RESULTS_HEADER: &str =
    "scenario,mode,omega,it_global,it_fine_min,it_fine_max,wall_ms,rel_residual,rel_error,converged";
pub const HISTORY_HEADER: &str = "iter,time_ms,residual_norm,omega";

/// Results table, one line per run.
pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for row in rows {
        let rel_error = row.rel_error.map(|e| e.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.scenario,
            row.mode,
            row.omega,
            row.it_global,
            row.it_fine_min,
            row.it_fine_max,
            row.wall_ms,
            row.rel_residual,
            rel_error,
            row.converged
        ));
    }
    out
}

/// Convergence history of one run, one line per residual evaluation.
pub fn history_csv(history: &[IterationSample]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for s in history {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.iteration, s.time_ms, s.residual_norm, s.omega
        ));
    }
    out
}

#[derive(Serialize)]
struct JsonHistorySample {
    iter: usize,
    time_ms: f64,
    residual_norm: f64,
    omega: f64,
}

#[derive(Serialize)]
struct JsonSummary<'a> {
    scenario: &'a str,
    problem_fingerprint: &'a str,
    reference_computed: bool,
    rows: &'a [ResultRow],
    histories: Vec<JsonHistoryEntry>,
}

#[derive(Serialize)]
struct JsonHistoryEntry {
    run_id: String,
    samples: Vec<JsonHistorySample>,
}

/// JSON mirror of the results table and all histories.
pub fn summary_json(scenario: &str, outcome: &ScenarioOutcome) -> Result<String, BenchError> {
    let histories = outcome
        .histories
        .iter()
        .map(|(run_id, samples)| JsonHistoryEntry {
            run_id: run_id.clone(),
            samples: samples
                .iter()
                .map(|s| JsonHistorySample {
                    iter: s.iteration,
                    time_ms: s.time_ms,
                    residual_norm: s.residual_norm,
                    omega: s.omega,
                })
                .collect(),
        })
        .collect();
    let summary = JsonSummary {
        scenario,
        problem_fingerprint: &outcome.problem_fingerprint,
        reference_computed: outcome.reference_computed,
        rows: &outcome.rows,
        histories,
    };
    serde_json::to_string_pretty(&summary)
        .map_err(|e| BenchError::Config(format!("summary serialization failed: {e}")))
}

/// Writes `results.csv`, one `<run_id>_history.csv` per run, and
/// `summary.json` under `dir`. Returns the written paths.
pub fn emit_report(
    scenario: &str,
    outcome: &ScenarioOutcome,
    dir: &Path,
) -> Result<Vec<PathBuf>, BenchError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| BenchError::Config(format!("cannot create `{}`: {e}", dir.display())))?;
    let mut written = Vec::new();

    let results_path = dir.join("results.csv");
    write_file(&results_path, &results_csv(&outcome.rows))?;
    written.push(results_path);

    for (run_id, history) in &outcome.histories {
        let path = dir.join(format!("{run_id}_history.csv"));
        write_file(&path, &history_csv(history))?;
        written.push(path);
    }

    let json_path = dir.join("summary.json");
    write_file(&json_path, &summary_json(scenario, outcome)?)?;
    written.push(json_path);
    Ok(written)
}

fn write_file(path: &Path, contents: &str) -> Result<(), BenchError> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| BenchError::Config(format!("cannot write `{}`: {e}", path.display())))?;
    file.write_all(contents.as_bytes())
        .map_err(|e| BenchError::Config(format!("cannot write `{}`: {e}", path.display())))
}
