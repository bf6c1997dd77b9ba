//! Solution engines: synchronous relaxed iteration (fixed and dynamic
//! relaxation) and the asynchronous coordinator/worker engine over two
//! backends: real threads and a deterministic discrete-event simulator.

pub mod mailbox;
mod iteration;
mod record;
mod schedule;
mod simulator;
mod sync;
mod threaded;

pub use iteration::check_convergence;
pub use record::{EngineMode, IterationSample, RunRecord, RunStatus};
pub use schedule::{DelayMode, DelaySchedule, SIM_BASE_MS};
pub use sync::{run_aitken, run_sync};

use crate::coupling::CouplingProblem;
use crate::error::Result;

/// Execution backend for [`run_async`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsyncBackend {
    /// Deterministic single-threaded discrete-event execution; delays are
    /// simulated and reproducible for a given `(schedule, seed)`.
    Simulator,
    /// Real worker threads with injected delays and genuine wall time.
    Threads,
}

/// Asynchronous coupling iteration: the coordinator updates the interface
/// load whenever at least one fresh patch reaction has arrived, using the
/// latest (possibly stale) value from every other patch.
pub fn run_async(
    problem: &CouplingProblem,
    omega: f64,
    tol: f64,
    max_iters: usize,
    schedule: &DelaySchedule,
    workers: usize,
    backend: AsyncBackend,
) -> Result<RunRecord> {
    match backend {
        AsyncBackend::Simulator => {
            simulator::run_async_simulated(problem, omega, tol, max_iters, schedule, workers)
        }
        AsyncBackend::Threads => threaded::run_threaded(
            problem,
            omega,
            tol,
            max_iters,
            schedule,
            workers,
            threaded::Trigger::AnyNew,
        ),
    }
}

/// Synchronous pacing on the threaded backend: identical allocation,
/// mailboxes, and delay injection as [`run_async`] with
/// [`AsyncBackend::Threads`], but the coordinator waits for every patch each
/// iteration. This is the like-for-like wall-time baseline for load-imbalance
/// comparisons.
pub fn run_sync_threaded(
    problem: &CouplingProblem,
    omega: f64,
    tol: f64,
    max_iters: usize,
    schedule: &DelaySchedule,
    workers: usize,
) -> Result<RunRecord> {
    threaded::run_threaded(
        problem,
        omega,
        tol,
        max_iters,
        schedule,
        workers,
        threaded::Trigger::AllNew,
    )
}
