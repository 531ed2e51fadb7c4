//! Simulation of applications sharing one embedded GPU, with generated API
//! hooks that serialize their GPU operations under a global lock.
//!
//! - [`runtime`]: routine calls, hook tables and the dispatcher.
//! - [`strategies`]: the lock and the callback, synced and worker hooks.
//! - [`toolchain`]: hook library generation from interface declarations.
//! - [`engine`]: the discrete-event GPU model and its trace.
//! - [`workloads`]: the mmult and dna benchmarks and the run harness.
//! - [`metrics`]: NET, IPS, overlap and order checks over finished runs.

pub mod engine;
pub mod metrics;
pub mod runtime;
pub mod strategies;
pub mod toolchain;
pub mod workloads;

pub use engine::{
    SimConfig, SimError, SimOutput, Simulation, TimingParams, TraceEvent, TraceFormat,
};
pub use metrics::{build_report, MetricsError, Report};
pub use runtime::{AppId, HookTable, KernelId, OpId, StreamId};
pub use strategies::Strategy;
pub use toolchain::{GenerateError, HookLibrary};
pub use workloads::{run_configuration, Bench, Isol, RunConfig, RunError, RunResult};
