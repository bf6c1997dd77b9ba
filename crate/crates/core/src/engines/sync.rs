//! Synchronous coupling iteration: every iteration gathers fresh fine
//! reactions from all patches, assembles the residual on the global model,
//! and applies one relaxed update of the interface load.

use std::time::Instant;

use nalgebra::DVector;

use crate::coupling::CouplingProblem;
use crate::error::{Error, Result};

use super::iteration::{IterationCore, Relaxation, StepOutcome};
use super::record::{EngineMode, RunRecord, RunStatus};

/// Fixed-relaxation synchronous iteration.
pub fn run_sync(
    problem: &CouplingProblem,
    omega: f64,
    tol: f64,
    max_iters: usize,
) -> Result<RunRecord> {
    run_relaxed(problem, Relaxation::Fixed(omega), tol, max_iters, EngineMode::Sync)
}

/// Synchronous iteration with dynamic relaxation estimated each iteration
/// from inner products of consecutive residuals; the first update uses
/// `omega0`.
pub fn run_aitken(
    problem: &CouplingProblem,
    omega0: f64,
    tol: f64,
    max_iters: usize,
) -> Result<RunRecord> {
    run_relaxed(
        problem,
        Relaxation::Aitken { omega0 },
        tol,
        max_iters,
        EngineMode::Aitken,
    )
}

fn run_relaxed(
    problem: &CouplingProblem,
    relax: Relaxation,
    tol: f64,
    max_iters: usize,
    mode: EngineMode,
) -> Result<RunRecord> {
    let clock = Instant::now();
    let mut core = IterationCore::new(problem, relax, tol, max_iters)?;
    let n_patches = problem.n_patches();
    let mut it_fine = vec![0_usize; n_patches];
    let mut contributions: Vec<DVector<f64>> = Vec::with_capacity(n_patches);

    let status = loop {
        contributions.clear();
        for patch in 0..n_patches {
            let trace = problem.patch_coarse_trace(patch, &core.trace)?;
            contributions.push(problem.patch_contribution(patch, &trace)?);
            it_fine[patch] += 1;
        }

        let now_ms = clock.elapsed().as_secs_f64() * 1e3;
        match core.evaluate(&contributions, now_ms)? {
            StepOutcome::Updated => continue,
            StepOutcome::Converged => break RunStatus::Converged,
            StepOutcome::ConvergedStationary => break RunStatus::ConvergedStationary,
            StepOutcome::MaxedOut => break RunStatus::MaxIterations,
            StepOutcome::Diverged => {
                let iteration = core.evaluations();
                let record = core.finalize(
                    mode,
                    RunStatus::Diverged,
                    it_fine,
                    Vec::new(),
                    None,
                    clock.elapsed().as_secs_f64() * 1e3,
                )?;
                let omega = record
                    .history
                    .last()
                    .map(|s| s.omega)
                    .unwrap_or_else(|| relax.initial_omega());
                return Err(Error::Diverged {
                    mode: if matches!(mode, EngineMode::Aitken) {
                        "aitken"
                    } else {
                        "sync"
                    },
                    iteration,
                    omega,
                    record: Box::new(record),
                });
            }
        }
    };

    let wall_ms = clock.elapsed().as_secs_f64() * 1e3;
    core.finalize(mode, status, it_fine, Vec::new(), None, wall_ms)
}
