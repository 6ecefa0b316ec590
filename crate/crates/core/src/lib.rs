//! Relaxed priority schedulers and incremental algorithms run through them.
//!
//! Every run is a single-threaded, seeded state machine, so a configuration
//! and a seed determine the complete trace.

#![no_std]

extern crate alloc;

pub mod incremental;
pub mod ostree;
pub mod sched;
pub mod sssp;
pub mod txsim;
pub mod workloads;

pub use incremental::{
    assert_lemmas, charge_step, run, run_with, CheckMode, DependencyOracle, ExecutionReport,
    Label, LemmaViolation, RunError, Workload, WorkloadError,
};
pub use sched::{
    AdversaryStrategy, SchedError, Scheduler, SchedulerConfig, SchedulerKind, SchedulerTrace,
};
