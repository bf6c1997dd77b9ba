//! Per-run iteration logs.

use nalgebra::DVector;

/// Which engine produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineMode {
    Sync,
    Aitken,
    Async,
    /// Threaded execution with synchronous pacing (the coordinator waits for
    /// every patch each iteration); used for like-for-like timing baselines.
    SyncBarrier,
}

impl std::fmt::Display for EngineMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EngineMode::Sync => "sync",
            EngineMode::Aitken => "aitken",
            EngineMode::Async => "async",
            EngineMode::SyncBarrier => "sync-barrier",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// Residual dropped below tolerance.
    Converged,
    /// Consecutive residuals became identical before the tolerance was met;
    /// for a well-posed problem this only happens at the solution.
    ConvergedStationary,
    /// The stale-data residual met the tolerance but the post-run
    /// verification with fresh reactions did not.
    ConvergedUnverified,
    MaxIterations,
    Diverged,
}

/// One residual evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationSample {
    pub iteration: usize,
    pub time_ms: f64,
    pub residual_norm: f64,
    /// Relaxation factor applied at this iteration (the last applied value on
    /// terminal samples).
    pub omega: f64,
}

/// Complete log of one engine run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub mode: EngineMode,
    pub status: RunStatus,
    /// Number of interface-load updates (global re-solves after the initial
    /// one).
    pub it_global: usize,
    /// Fine solves performed per patch.
    pub it_fine: Vec<usize>,
    /// One sample per residual evaluation.
    pub history: Vec<IterationSample>,
    /// For asynchronous runs: per evaluation, the fine-iteration index whose
    /// reaction was used, per patch (0 = the initial zero reaction).
    pub sigma_log: Vec<Vec<usize>>,
    /// Convergence scale (first evaluated residual norm, floored).
    pub scale: f64,
    pub final_relative_residual: f64,
    /// Fresh-reaction residual from the asynchronous verification pass.
    pub verified_relative_residual: Option<f64>,
    /// Final global interface trace.
    pub final_trace: DVector<f64>,
    /// Full fine displacement field per patch at the final trace.
    pub fine_fields: Vec<DVector<f64>>,
    /// Elapsed milliseconds: real time for the synchronous engines and the
    /// threaded backend, simulated time for the simulator backend.
    pub wall_ms: f64,
}

impl RunRecord {
    pub fn converged(&self) -> bool {
        matches!(
            self.status,
            RunStatus::Converged | RunStatus::ConvergedStationary
        )
    }

    pub fn it_fine_min(&self) -> usize {
        self.it_fine.iter().copied().min().unwrap_or(0)
    }

    pub fn it_fine_max(&self) -> usize {
        self.it_fine.iter().copied().max().unwrap_or(0)
    }
}
