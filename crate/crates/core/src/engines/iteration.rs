//! Shared fixed-point iteration state: residual evaluation, convergence
//! bookkeeping, relaxation, and the interface-load update. Every engine runs
//! this core so that identical inputs produce bit-identical iterates.

use nalgebra::DVector;

use crate::coupling::CouplingProblem;
use crate::error::{Error, Result};

use super::record::{EngineMode, IterationSample, RunRecord, RunStatus};

/// `true` iff `‖r‖₂ / scale <= tol`. The initialization residual (all-zero
/// reactions) is never evaluated by the engines, which realizes the
/// "initialization excluded" rule.
pub fn check_convergence(residual: &DVector<f64>, scale: f64, tol: f64) -> bool {
    residual.norm() / scale <= tol
}

pub(crate) fn check_convergence_norm(norm: f64, scale: f64, tol: f64) -> bool {
    norm / scale <= tol
}

/// Relaxation strategy for the interface-load update.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Relaxation {
    Fixed(f64),
    /// Dynamic relaxation from inner products of consecutive residuals:
    /// `w_next = -w * <r_prev, dr> / ‖dr‖²` with `dr = r - r_prev`.
    Aitken { omega0: f64 },
}

impl Relaxation {
    pub fn initial_omega(&self) -> f64 {
        match *self {
            Relaxation::Fixed(w) => w,
            Relaxation::Aitken { omega0 } => omega0,
        }
    }
}

#[derive(Debug)]
pub(crate) struct RelaxState {
    mode: Relaxation,
    prev_residual: Option<DVector<f64>>,
    last_omega: f64,
}

pub(crate) enum RelaxStep {
    Omega(f64),
    /// Consecutive residuals are identical; the iteration is stationary.
    Stationary,
}

impl RelaxState {
    pub(crate) fn new(mode: Relaxation) -> Self {
        RelaxState {
            last_omega: mode.initial_omega(),
            prev_residual: None,
            mode,
        }
    }

    pub(crate) fn next_omega(&mut self, residual: &DVector<f64>) -> RelaxStep {
        let omega = match self.mode {
            Relaxation::Fixed(w) => w,
            Relaxation::Aitken { omega0 } => match &self.prev_residual {
                None => omega0,
                Some(prev) => {
                    let delta = residual - prev;
                    let denom = delta.norm_squared();
                    if denom == 0.0 {
                        return RelaxStep::Stationary;
                    }
                    -self.last_omega * prev.dot(&delta) / denom
                }
            },
        };
        if matches!(self.mode, Relaxation::Aitken { .. }) {
            self.prev_residual = Some(residual.clone());
        }
        self.last_omega = omega;
        RelaxStep::Omega(omega)
    }

    pub(crate) fn last_omega(&self) -> f64 {
        self.last_omega
    }
}

/// Outcome of one residual evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StepOutcome {
    /// The interface load was updated and the global model re-solved.
    Updated,
    Converged,
    ConvergedStationary,
    MaxedOut,
    Diverged,
}

/// Iteration state owned by the coordinating side of every engine.
pub(crate) struct IterationCore<'p> {
    pub problem: &'p CouplingProblem,
    /// Interface load applied to the global model.
    pub interface_load: DVector<f64>,
    /// Current global interface trace.
    pub trace: DVector<f64>,
    /// Assembled complementary reaction at the current trace.
    pub complementary: Option<DVector<f64>>,
    relax: RelaxState,
    tol: f64,
    max_iters: usize,
    scale: Option<f64>,
    pub it_global: usize,
    pub history: Vec<IterationSample>,
    last_norm: f64,
}

impl<'p> IterationCore<'p> {
    /// Validates the settings and performs the bootstrap global solve at zero
    /// interface load (no residual is evaluated for it).
    pub fn new(
        problem: &'p CouplingProblem,
        relax: Relaxation,
        tol: f64,
        max_iters: usize,
    ) -> Result<Self> {
        if !(relax.initial_omega() > 0.0) {
            return Err(Error::InvalidSetting(format!(
                "relaxation factor must be positive, got {}",
                relax.initial_omega()
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidSetting(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        if max_iters < 1 {
            return Err(Error::InvalidSetting("max_iters must be at least 1".into()));
        }

        let interface_load = DVector::zeros(problem.n_global());
        let (trace, complementary) = problem.global_solve(&interface_load)?;
        Ok(IterationCore {
            problem,
            interface_load,
            trace,
            complementary,
            relax: RelaxState::new(relax),
            tol,
            max_iters,
            scale: None,
            it_global: 0,
            history: Vec::new(),
            last_norm: f64::NAN,
        })
    }

    pub fn evaluations(&self) -> usize {
        self.history.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale.unwrap_or(1.0)
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Evaluates the residual from per-patch coarse-side contributions,
    /// records it, and either stops or applies the relaxed update and
    /// re-solves the global model.
    pub fn evaluate(&mut self, contributions: &[DVector<f64>], now_ms: f64) -> Result<StepOutcome> {
        let residual = self
            .problem
            .residual_from_contributions(self.complementary.as_ref(), contributions);
        let norm = residual.norm();
        self.last_norm = norm;
        let iteration = self.history.len() + 1;

        if !norm.is_finite() {
            self.push_sample(iteration, now_ms, norm);
            return Ok(StepOutcome::Diverged);
        }

        if self.scale.is_none() {
            let floor = f64::EPSILON * self.problem.reference_rhs().norm();
            let scale = norm.max(floor);
            // Fully degenerate problem (zero load, zero residual): converged.
            self.scale = Some(if scale > 0.0 { scale } else { 1.0 });
        }
        let scale = self.scale.expect("scale just set");

        if check_convergence_norm(norm, scale, self.tol) {
            self.push_sample(iteration, now_ms, norm);
            return Ok(StepOutcome::Converged);
        }

        let omega = match self.relax.next_omega(&residual) {
            RelaxStep::Stationary => {
                self.push_sample(iteration, now_ms, norm);
                return Ok(StepOutcome::ConvergedStationary);
            }
            RelaxStep::Omega(w) => w,
        };
        self.push_sample(iteration, now_ms, norm);

        self.interface_load.axpy(omega, &residual, 1.0);
        let (trace, complementary) = self.problem.global_solve(&self.interface_load)?;
        self.trace = trace;
        self.complementary = complementary;
        self.it_global += 1;

        if self.it_global >= self.max_iters {
            Ok(StepOutcome::MaxedOut)
        } else {
            Ok(StepOutcome::Updated)
        }
    }

    fn push_sample(&mut self, iteration: usize, time_ms: f64, residual_norm: f64) {
        self.history.push(IterationSample {
            iteration,
            time_ms,
            residual_norm,
            omega: self.relax.last_omega(),
        });
    }

    /// Builds the final record, recovering the fine fields at the final
    /// trace.
    pub fn finalize(
        self,
        mode: EngineMode,
        status: RunStatus,
        it_fine: Vec<usize>,
        sigma_log: Vec<Vec<usize>>,
        verified_relative_residual: Option<f64>,
        wall_ms: f64,
    ) -> Result<RunRecord> {
        let mut fine_fields = Vec::with_capacity(self.problem.n_patches());
        for patch in 0..self.problem.n_patches() {
            let t = self.problem.patch_fine_trace(patch, &self.trace)?;
            fine_fields.push(self.problem.fine_handle(patch).interior_recovery(&t)?);
        }
        Ok(RunRecord {
            mode,
            status,
            it_global: self.it_global,
            it_fine,
            history: self.history,
            sigma_log,
            scale: self.scale.unwrap_or(1.0),
            final_relative_residual: if self.last_norm.is_nan() {
                f64::NAN
            } else {
                self.last_norm / self.scale.unwrap_or(1.0)
            },
            verified_relative_residual,
            final_trace: self.trace,
            fine_fields,
            wall_ms,
        })
    }
}
