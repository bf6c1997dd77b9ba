//! Deterministic delay injection for the asynchronous backends.
//!
//! The same schedule drives both execution backends: in the simulator it sets
//! the simulated duration of each fine solve, in the threaded backend it adds
//! real sleeps. Given `(mode, seed, params)` the induced delays are fully
//! deterministic.

use std::time::Duration;

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayMode {
    /// No injected delay; every solve costs the base duration.
    None,
    /// Constant extra delay per worker (`params[w]`, cycled).
    Fixed,
    /// Uniform random extra delay in `[0, params[0])`, drawn per solve from a
    /// per-worker seeded stream.
    SeededRandom,
    /// Multiplicative slowdown per worker (`params[w]`, cycled).
    WorkerSlowdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelaySchedule {
    pub mode: DelayMode,
    pub seed: u64,
    /// Per-mode parameters, in simulated/real milliseconds (factors for
    /// [`DelayMode::WorkerSlowdown`]).
    pub params: Vec<f64>,
}

/// Simulated duration of one un-delayed fine solve or coordinator update.
pub const SIM_BASE_MS: f64 = 1.0;

impl DelaySchedule {
    pub fn none() -> Self {
        DelaySchedule {
            mode: DelayMode::None,
            seed: 0,
            params: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            DelayMode::None => Ok(()),
            DelayMode::Fixed => {
                if self.params.iter().any(|&d| d < 0.0) {
                    return Err(Error::InvalidSetting("fixed delays must be >= 0".into()));
                }
                Ok(())
            }
            DelayMode::SeededRandom => {
                if self.params.first().copied().unwrap_or(1.0) <= 0.0 {
                    return Err(Error::InvalidSetting(
                        "random delay bound must be positive".into(),
                    ));
                }
                Ok(())
            }
            DelayMode::WorkerSlowdown => {
                if self.params.iter().any(|&f| f < 1.0) {
                    return Err(Error::InvalidSetting(
                        "slowdown factors must be >= 1".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    fn param(&self, worker: usize, default: f64) -> f64 {
        if self.params.is_empty() {
            default
        } else {
            self.params[worker % self.params.len()]
        }
    }

    pub(crate) fn sampler(&self, worker: usize) -> DelaySampler {
        DelaySampler {
            mode: self.mode,
            fixed_extra: self.param(worker, 0.0),
            random_bound: self.params.first().copied().unwrap_or(1.0),
            slowdown: match self.mode {
                DelayMode::WorkerSlowdown => self.param(worker, 1.0),
                _ => 1.0,
            },
            rng: SmallRng::seed_from_u64(
                self.seed ^ (worker as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            ),
        }
    }
}

/// Per-worker delay stream.
#[derive(Debug)]
pub(crate) struct DelaySampler {
    mode: DelayMode,
    fixed_extra: f64,
    random_bound: f64,
    slowdown: f64,
    rng: SmallRng,
}

impl DelaySampler {
    /// Simulated duration of one solve.
    pub fn sim_duration(&mut self, base: f64) -> f64 {
        match self.mode {
            DelayMode::None => base,
            DelayMode::Fixed => base + self.fixed_extra,
            DelayMode::SeededRandom => base + self.rng.gen_range(0.0..self.random_bound),
            DelayMode::WorkerSlowdown => base * self.slowdown,
        }
    }

    /// Real sleep injected after a solve that took `measured`.
    pub fn injected_sleep(&mut self, measured: Duration) -> Duration {
        match self.mode {
            DelayMode::None => Duration::ZERO,
            DelayMode::Fixed => Duration::from_secs_f64(self.fixed_extra / 1e3),
            DelayMode::SeededRandom => {
                Duration::from_secs_f64(self.rng.gen_range(0.0..self.random_bound) / 1e3)
            }
            DelayMode::WorkerSlowdown => measured.mul_f64(self.slowdown - 1.0),
        }
    }
}
