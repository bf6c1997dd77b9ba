//! Non-intrusive global-local coupling solvers for linear elasticity.
//!
//! A coarse model of the whole structure is corrected by refined patches
//! through an interface load, iterated to the reference solution by relaxed
//! fixed-point engines: synchronous with fixed or dynamic relaxation, and an
//! asynchronous coordinator/worker scheme over latest-value mailboxes with a
//! deterministic discrete-event simulator backend.

pub mod coupling;
pub mod engines;
pub mod error;
pub mod fem;
pub mod interp;
pub mod layout;
pub mod mesh;
pub mod schur;
pub mod sparse;

pub use coupling::{CouplingProblem, InterfaceSpace, ReferenceSolution};
pub use engines::{
    check_convergence, run_aitken, run_async, run_sync, run_sync_threaded, AsyncBackend,
    DelayMode, DelaySchedule, EngineMode, RunRecord, RunStatus,
};
pub use error::{Error, Result};
pub use layout::{GridLayout, PatchCells};
