//! Deterministic single-threaded discrete-event backend for the asynchronous
//! engine.
//!
//! The coordinator and the workers exchange values through the same
//! latest-value mailboxes as the threaded backend; only the notion of time is
//! simulated. Work started at simulated time `t` reads its inputs at `t`,
//! and publishes its outputs at `t + duration`, with durations drawn from the
//! delay schedule. Events at equal times are drained before anything new
//! starts, so simultaneous arrivals are batched exactly like a synchronous
//! sweep.

use std::cmp::Ordering as CmpOrdering;
use std::collections::BinaryHeap;

use nalgebra::DVector;

use crate::coupling::CouplingProblem;
use crate::error::{Error, Result};

use super::iteration::{IterationCore, Relaxation, StepOutcome};
use super::mailbox::{mailbox, MailboxReader, MailboxWriter};
use super::record::{EngineMode, RunRecord, RunStatus};
use super::schedule::{DelaySchedule, DelaySampler, SIM_BASE_MS};

#[derive(Debug, Clone, PartialEq)]
enum EventKind {
    /// Coordinator publishes the traces computed when it started.
    CoordinatorDone,
    /// Worker publishes one patch contribution.
    WorkerDone { worker: usize, patch: usize },
}

#[derive(Debug, Clone, PartialEq)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> CmpOrdering {
        // Min-heap by (time, insertion order) through BinaryHeap's max
        // ordering, hence reversed.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<CmpOrdering> {
        Some(self.cmp(other))
    }
}

struct WorkerSim {
    patches: Vec<usize>,
    /// Rotating cursor for fair patch selection.
    next: usize,
    busy: bool,
    sampler: DelaySampler,
}

struct PatchChannel {
    trace_writer: MailboxWriter,
    trace_reader: MailboxReader,
    reaction_writer: MailboxWriter,
    reaction_reader: MailboxReader,
    /// Contribution computed at job start, published at job completion.
    in_flight: Option<DVector<f64>>,
    fine_iters: usize,
}

pub(crate) fn run_async_simulated(
    problem: &CouplingProblem,
    omega: f64,
    tol: f64,
    max_iters: usize,
    schedule: &DelaySchedule,
    workers: usize,
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

    let mut core = IterationCore::new(problem, Relaxation::Fixed(omega), tol, max_iters)?;
    let mut channels: Vec<PatchChannel> = (0..n_patches)
        .map(|_| {
            let (trace_writer, trace_reader) = mailbox();
            let (reaction_writer, reaction_reader) = mailbox();
            PatchChannel {
                trace_writer,
                trace_reader,
                reaction_writer,
                reaction_reader,
                in_flight: None,
                fine_iters: 0,
            }
        })
        .collect();
    let mut sims: Vec<WorkerSim> = (0..workers)
        .map(|w| WorkerSim {
            patches: (0..n_patches).filter(|p| p % workers == w).collect(),
            next: 0,
            busy: false,
            sampler: schedule.sampler(w),
        })
        .collect();

    // Latest contribution per patch; starts at the zero reaction.
    let mut latest: Vec<DVector<f64>> = (0..n_patches)
        .map(|p| DVector::zeros(problem.coarse_handle(problem.patch_subdomain(p)).n_boundary()))
        .collect();
    let mut latest_src: Vec<usize> = vec![0; n_patches];
    let mut sigma_log: Vec<Vec<usize>> = Vec::new();

    let mut events = BinaryHeap::new();
    let mut seq = 0_u64;
    let push = |events: &mut BinaryHeap<Event>, seq: &mut u64, time: f64, kind: EventKind| {
        events.push(Event {
            time,
            seq: *seq,
            kind,
        });
        *seq += 1;
    };

    // Bootstrap: the zero-load solve happened in IterationCore::new at t = 0;
    // its traces go out after one coordinator duration.
    let mut coordinator_busy = true;
    let mut pending_traces: Option<Vec<DVector<f64>>> = Some(collect_traces(problem, &core)?);
    push(&mut events, &mut seq, SIM_BASE_MS, EventKind::CoordinatorDone);

    let mut now = 0.0_f64;
    let mut status: Option<RunStatus> = None;
    let mut diverged_at: Option<usize> = None;

    while status.is_none() {
        let Some(first) = events.pop() else {
            return Err(Error::InvalidSetting(
                "simulator ran out of events before termination".into(),
            ));
        };
        now = first.time;
        let mut batch = vec![first];
        while let Some(next) = events.peek() {
            if next.time == now {
                batch.push(events.pop().expect("peeked"));
            } else {
                break;
            }
        }

        // Publication phase: all completions at this timestamp take effect
        // before anything new starts.
        for event in &batch {
            match &event.kind {
                EventKind::CoordinatorDone => {
                    let traces = pending_traces.take().expect("coordinator had work in flight");
                    for (patch, trace) in traces.into_iter().enumerate() {
                        channels[patch].trace_writer.put(&trace, core.it_global);
                    }
                    coordinator_busy = false;
                }
                EventKind::WorkerDone { worker, patch } => {
                    let contribution = channels[*patch]
                        .in_flight
                        .take()
                        .expect("worker had work in flight");
                    let src = channels[*patch].fine_iters;
                    channels[*patch].reaction_writer.put(&contribution, src);
                    sims[*worker].busy = false;
                }
            }
        }

        // Start phase: coordinator first, then workers, in fixed order.
        if !coordinator_busy && channels.iter().any(|ch| ch.reaction_reader.has_news()) {
            for (patch, ch) in channels.iter_mut().enumerate() {
                if let Some(reading) = ch.reaction_reader.read_latest() {
                    latest[patch] = reading.data;
                    latest_src[patch] = reading.src_iter;
                }
            }
            sigma_log.push(latest_src.clone());
            match core.evaluate(&latest, now)? {
                StepOutcome::Updated => {
                    pending_traces = Some(collect_traces(problem, &core)?);
                    coordinator_busy = true;
                    push(&mut events, &mut seq, now + SIM_BASE_MS, EventKind::CoordinatorDone);
                }
                StepOutcome::Converged => status = Some(RunStatus::Converged),
                StepOutcome::ConvergedStationary => status = Some(RunStatus::ConvergedStationary),
                StepOutcome::MaxedOut => status = Some(RunStatus::MaxIterations),
                StepOutcome::Diverged => {
                    status = Some(RunStatus::Diverged);
                    diverged_at = Some(core.evaluations());
                }
            }
        }
        if status.is_some() {
            break;
        }

        for (w, sim) in sims.iter_mut().enumerate() {
            if sim.busy {
                continue;
            }
            // Pick the next owned patch with a fresh trace, round-robin.
            let n_owned = sim.patches.len();
            for k in 0..n_owned {
                let patch = sim.patches[(sim.next + k) % n_owned];
                if let Some(reading) = channels[patch].trace_reader.read_latest() {
                    let contribution = problem.patch_contribution(patch, &reading.data)?;
                    channels[patch].fine_iters += 1;
                    channels[patch].in_flight = Some(contribution);
                    let duration = sim.sampler.sim_duration(SIM_BASE_MS);
                    push(
                        &mut events,
                        &mut seq,
                        now + duration,
                        EventKind::WorkerDone { worker: w, patch },
                    );
                    sim.next = (sim.next + k + 1) % n_owned;
                    sim.busy = true;
                    break;
                }
            }
        }
    }

    let status = status.expect("loop exits with a status");
    let it_fine: Vec<usize> = channels.iter().map(|ch| ch.fine_iters).collect();

    // Stale-data convergence is re-checked against fresh reactions.
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

    if status == RunStatus::Diverged {
        let record = core.finalize(EngineMode::Async, status, it_fine, sigma_log, None, now)?;
        let omega_last = record.history.last().map(|s| s.omega).unwrap_or(omega);
        return Err(Error::Diverged {
            mode: "async",
            iteration: diverged_at.unwrap_or(0),
            omega: omega_last,
            record: Box::new(record),
        });
    }
    core.finalize(EngineMode::Async, status, it_fine, sigma_log, verified, now)
}

fn collect_traces(
    problem: &CouplingProblem,
    core: &IterationCore<'_>,
) -> Result<Vec<DVector<f64>>> {
    (0..problem.n_patches())
        .map(|patch| problem.patch_coarse_trace(patch, &core.trace))
        .collect()
}
