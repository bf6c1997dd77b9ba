//! Asynchronous engine properties: lockstep equivalence with the synchronous
//! engine, determinism of the simulated scheduler, delay tolerance, and the
//! threaded backend.

use glc_core::engines::{
    run_async, run_sync, run_sync_threaded, AsyncBackend, DelayMode, DelaySchedule, RunStatus,
};
use glc_core::layout::GridLayout;

fn small_beam() -> glc_core::CouplingProblem {
    GridLayout::beam([2, 2, 2], 2, 4).build_problem().unwrap()
}

#[test]
fn zero_delay_simulator_runs_in_lockstep_with_sync() {
    let problem = small_beam();
    let omega = 0.4; // slow enough to observe many iterations
    let max_iters = 25;

    let sync = run_sync(&problem, omega, 1e-14, max_iters).unwrap();
    let async_rec = run_async(
        &problem,
        omega,
        1e-14,
        max_iters,
        &DelaySchedule::none(),
        problem.n_patches(),
        AsyncBackend::Simulator,
    )
    .unwrap();

    assert!(sync.history.len() >= 20);
    assert_eq!(sync.history.len(), async_rec.history.len());
    for (s, a) in sync.history.iter().zip(&async_rec.history) {
        let scale = s.residual_norm.abs().max(1.0);
        assert!(
            (s.residual_norm - a.residual_norm).abs() <= 1e-12 * scale,
            "iteration {}: sync {} vs async {}",
            s.iteration,
            s.residual_norm,
            a.residual_norm
        );
    }
    let trace_diff = (&sync.final_trace - &async_rec.final_trace).amax();
    assert!(trace_diff <= 1e-12 * sync.final_trace.amax().max(1.0));

    // With no delays every reaction is fresh: sigma(s, j) = j.
    for (j, row) in async_rec.sigma_log.iter().enumerate() {
        for &src in row {
            assert_eq!(src, j + 1);
        }
    }
}

#[test]
fn simulated_scheduler_is_deterministic() {
    let problem = small_beam();
    let schedule = DelaySchedule {
        mode: DelayMode::SeededRandom,
        seed: 42,
        params: vec![3.0],
    };
    let run = || {
        run_async(
            &problem,
            0.3,
            1e-9,
            20_000,
            &schedule,
            4,
            AsyncBackend::Simulator,
        )
        .unwrap()
    };
    let a = run();
    let b = run();

    assert_eq!(a.it_global, b.it_global);
    assert_eq!(a.it_fine, b.it_fine);
    assert_eq!(a.sigma_log, b.sigma_log);
    assert_eq!(a.history.len(), b.history.len());
    for (x, y) in a.history.iter().zip(&b.history) {
        assert_eq!(x.residual_norm.to_bits(), y.residual_norm.to_bits());
        assert_eq!(x.time_ms.to_bits(), y.time_ms.to_bits());
    }
    for (x, y) in a.final_trace.iter().zip(b.final_trace.iter()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn different_seeds_change_the_delay_realization() {
    let problem = small_beam();
    let schedule = |seed| DelaySchedule {
        mode: DelayMode::SeededRandom,
        seed,
        params: vec![3.0],
    };
    let a = run_async(
        &problem,
        0.3,
        1e-9,
        20_000,
        &schedule(1),
        4,
        AsyncBackend::Simulator,
    )
    .unwrap();
    let b = run_async(
        &problem,
        0.3,
        1e-9,
        20_000,
        &schedule(2),
        4,
        AsyncBackend::Simulator,
    )
    .unwrap();
    assert_ne!(a.sigma_log, b.sigma_log);
}

#[test]
fn random_delays_still_converge_to_the_reference() {
    let problem = small_beam();
    let reference = problem.reference_solve().unwrap().clone();
    let tol = 1e-9;
    for seed in [7, 42, 1234] {
        let schedule = DelaySchedule {
            mode: DelayMode::SeededRandom,
            seed,
            params: vec![2.0],
        };
        let record = run_async(
            &problem,
            0.35,
            tol,
            50_000,
            &schedule,
            problem.n_patches(),
            AsyncBackend::Simulator,
        )
        .unwrap();
        assert_eq!(record.status, RunStatus::Converged, "seed {seed}");
        let err = (&record.final_trace - &reference.trace).norm() / reference.trace.norm();
        assert!(err <= 10.0 * tol, "seed {seed}: error {err}");
        // Stale data shows up in the delay log.
        assert!(record.sigma_log.len() >= record.it_global);
    }
}

#[test]
fn uneven_workers_make_global_and_fine_counts_differ() {
    let problem = small_beam();
    let schedule = DelaySchedule {
        mode: DelayMode::WorkerSlowdown,
        seed: 0,
        params: vec![3.0, 1.0, 1.0, 1.0],
    };
    let record = run_async(
        &problem,
        0.15,
        1e-9,
        50_000,
        &schedule,
        4,
        AsyncBackend::Simulator,
    )
    .unwrap();
    assert!(record.converged());
    // The slowed worker's patches perform fewer fine iterations.
    assert!(record.it_fine_min() < record.it_fine_max());
}

#[test]
fn threaded_backend_converges_and_verifies() {
    let problem = small_beam();
    let reference = problem.reference_solve().unwrap().clone();
    let tol = 1e-9;
    let record = run_async(
        &problem,
        1.0,
        tol,
        50_000,
        &DelaySchedule::none(),
        4,
        AsyncBackend::Threads,
    )
    .unwrap();
    assert_eq!(record.status, RunStatus::Converged);
    let verified = record.verified_relative_residual.expect("verification pass runs");
    assert!(verified <= tol * 10.0);
    let err = (&record.final_trace - &reference.trace).norm() / reference.trace.norm();
    assert!(err <= 10.0 * tol);
}

#[test]
fn barrier_pacing_reproduces_the_sync_iterates() {
    let problem = small_beam();
    let omega = 0.9;
    let tol = 1e-9;
    let sync = run_sync(&problem, omega, tol, 2000).unwrap();
    let barrier = run_sync_threaded(
        &problem,
        omega,
        tol,
        2000,
        &DelaySchedule::none(),
        4,
    )
    .unwrap();
    assert!(barrier.converged());
    assert_eq!(sync.it_global, barrier.it_global);
    for (s, b) in sync.history.iter().zip(&barrier.history) {
        assert_eq!(s.residual_norm.to_bits(), b.residual_norm.to_bits());
    }
}
