//! Threaded backend: one coordinator (the calling thread) plus worker
//! threads owning the patches, communicating only through latest-value
//! mailboxes and a write-once stop flag.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use nalgebra::DVector;

use crate::coupling::CouplingProblem;
use crate::error::{Error, Result};

use super::iteration::{IterationCore, Relaxation, StepOutcome};
use super::mailbox::{mailbox, MailboxReader, MailboxWriter};
use super::record::{EngineMode, RunRecord, RunStatus};
use super::schedule::DelaySchedule;

/// When the coordinator wakes up: on any fresh reaction (asynchronous), or
/// only once every patch has produced one (synchronous pacing on the same
/// worker allocation).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Trigger {
    AnyNew,
    AllNew,
}

pub(crate) fn run_threaded(
    problem: &CouplingProblem,
    omega: f64,
    tol: f64,
    max_iters: usize,
    schedule: &DelaySchedule,
    workers: usize,
    trigger: Trigger,
) -> Result<RunRecord> {
    schedule.validate()?;
    if workers < 1 {
        return Err(Error::InvalidSetting("workers must be at least 1".into()));
    }
    let n_patches = problem.n_patches();
    if n_patches == 0 {
        return Err(Error::InvalidSetting(
            "asynchronous run requires at least one patch".into(),
        ));
    }
    let workers = workers.min(n_patches);

    let clock = Instant::now();
    let mut core = IterationCore::new(problem, Relaxation::Fixed(omega), tol, max_iters)?;

    let mut trace_writers: Vec<MailboxWriter> = Vec::with_capacity(n_patches);
    let mut reaction_readers: Vec<MailboxReader> = Vec::with_capacity(n_patches);
    let mut worker_ends: Vec<Option<(MailboxReader, MailboxWriter)>> = Vec::with_capacity(n_patches);
    for _ in 0..n_patches {
        let (tw, tr) = mailbox();
        let (rw, rr) = mailbox();
        trace_writers.push(tw);
        reaction_readers.push(rr);
        worker_ends.push(Some((tr, rw)));
    }

    let stop = AtomicBool::new(false);
    let failed = AtomicBool::new(false);
    let failure: Mutex<Option<(usize, String)>> = Mutex::new(None);
    let fine_counts: Vec<AtomicUsize> = (0..n_patches).map(|_| AtomicUsize::new(0)).collect();

    let mut latest: Vec<DVector<f64>> = (0..n_patches)
        .map(|p| DVector::zeros(problem.coarse_handle(problem.patch_subdomain(p)).n_boundary()))
        .collect();
    let mut latest_src = vec![0_usize; n_patches];
    let mut sigma_log: Vec<Vec<usize>> = Vec::new();
    let mut status: Option<RunStatus> = None;
    let mut coordinator_error: Option<Error> = None;

    std::thread::scope(|scope| {
        for w in 0..workers {
            let owned: Vec<(usize, MailboxReader, MailboxWriter)> = (0..n_patches)
                .filter(|p| p % workers == w)
                .map(|p| {
                    let (tr, rw) = worker_ends[p].take().expect("each patch assigned once");
                    (p, tr, rw)
                })
                .collect();
            let mut sampler = schedule.sampler(w);
            let stop = &stop;
            let failed = &failed;
            let failure = &failure;
            let fine_counts = &fine_counts;
            scope.spawn(move || {
                let mut owned = owned;
                let result = catch_unwind(AssertUnwindSafe(|| -> Result<()> {
                    while !stop.load(Ordering::Acquire) {
                        let mut worked = false;
                        for (patch, trace_reader, reaction_writer) in owned.iter_mut() {
                            let Some(reading) = trace_reader.read_latest() else {
                                continue;
                            };
                            let started = Instant::now();
                            let contribution =
                                problem.patch_contribution(*patch, &reading.data)?;
                            let iter = fine_counts[*patch].fetch_add(1, Ordering::AcqRel) + 1;
                            let injected = sampler.injected_sleep(started.elapsed());
                            if !injected.is_zero() {
                                std::thread::sleep(injected);
                            }
                            reaction_writer.put(&contribution, iter);
                            worked = true;
                        }
                        if !worked {
                            std::thread::yield_now();
                        }
                    }
                    Ok(())
                }));
                let message = match result {
                    Ok(Ok(())) => None,
                    Ok(Err(err)) => Some(err.to_string()),
                    Err(panic) => Some(panic_message(panic)),
                };
                if let Some(message) = message {
                    let mut slot = failure.lock().expect("failure mutex");
                    slot.get_or_insert((w, message));
                    failed.store(true, Ordering::Release);
                }
            });
        }

        // Coordinator on the calling thread.
        let outcome = (|| -> Result<RunStatus> {
            for (patch, writer) in trace_writers.iter_mut().enumerate() {
                writer.put(&problem.patch_coarse_trace(patch, &core.trace)?, 0);
            }
            loop {
                if failed.load(Ordering::Acquire) {
                    let (worker, message) = failure
                        .lock()
                        .expect("failure mutex")
                        .clone()
                        .unwrap_or((usize::MAX, "unknown worker failure".into()));
                    return Err(Error::WorkerFailed { worker, message });
                }
                let fresh = reaction_readers.iter().filter(|r| r.has_news()).count();
                let ready = match trigger {
                    Trigger::AnyNew => fresh >= 1,
                    Trigger::AllNew => fresh == n_patches,
                };
                if !ready {
                    std::thread::yield_now();
                    continue;
                }
                for (patch, reader) in reaction_readers.iter_mut().enumerate() {
                    if let Some(reading) = reader.read_latest() {
                        latest[patch] = reading.data;
                        latest_src[patch] = reading.src_iter;
                    }
                }
                sigma_log.push(latest_src.clone());
                let now_ms = clock.elapsed().as_secs_f64() * 1e3;
                match core.evaluate(&latest, now_ms)? {
                    StepOutcome::Updated => {
                        for (patch, writer) in trace_writers.iter_mut().enumerate() {
                            writer.put(&problem.patch_coarse_trace(patch, &core.trace)?, core.it_global);
                        }
                    }
                    StepOutcome::Converged => return Ok(RunStatus::Converged),
                    StepOutcome::ConvergedStationary => return Ok(RunStatus::ConvergedStationary),
                    StepOutcome::MaxedOut => return Ok(RunStatus::MaxIterations),
                    StepOutcome::Diverged => return Ok(RunStatus::Diverged),
                }
            }
        })();
        stop.store(true, Ordering::Release);
        match outcome {
            Ok(s) => status = Some(s),
            Err(e) => coordinator_error = Some(e),
        }
    });

    if let Some(err) = coordinator_error {
        return Err(err);
    }
    let status = status.expect("coordinator produced a status");
    let it_fine: Vec<usize> = fine_counts.iter().map(|c| c.load(Ordering::Acquire)).collect();
    let mode = match trigger {
        Trigger::AnyNew => EngineMode::Async,
        Trigger::AllNew => EngineMode::SyncBarrier,
    };

    // Fresh-reaction verification of stale-data convergence.
    let (status, verified) = if status == RunStatus::Converged {
        let mut fresh = Vec::with_capacity(n_patches);
        for patch in 0..n_patches {
            let trace = problem.patch_coarse_trace(patch, &core.trace)?;
            fresh.push(problem.patch_contribution(patch, &trace)?);
        }
        let r = problem.residual_from_contributions(core.complementary.as_ref(), &fresh);
        let rel = r.norm() / core.scale();
        if rel <= core.tol() * 10.0 {
            (RunStatus::Converged, Some(rel))
        } else {
            (RunStatus::ConvergedUnverified, Some(rel))
        }
    } else {
        (status, None)
    };

    let wall_ms = clock.elapsed().as_secs_f64() * 1e3;
    if status == RunStatus::Diverged {
        let iteration = core.evaluations();
        let record = core.finalize(mode, status, it_fine, sigma_log, None, wall_ms)?;
        let omega_last = record.history.last().map(|s| s.omega).unwrap_or(omega);
        return Err(Error::Diverged {
            mode: "async",
            iteration,
            omega: omega_last,
            record: Box::new(record),
        });
    }
    core.finalize(mode, status, it_fine, sigma_log, verified, wall_ms)
}

fn panic_message(panic: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = panic.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = panic.downcast_ref::<String>() {
        s.clone()
    } else {
        "worker panicked".to_string()
    }
}
