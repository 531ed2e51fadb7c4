//! Discrete-event model of the shared GPU: block scheduler, context
//! switching, cold-cache penalties and the chronogram it records.

pub mod params;
pub mod records;
pub mod scheduler;
pub mod sim;
pub mod trace;

pub use params::{GpuShape, ParamsError, TimingParams};
pub use records::{CallRecord, OpClass, OpRecord, OpTag};
pub use scheduler::{block_cycles, kernel_duration, schedule_blocks, waves, Placement};
pub use sim::{
    AppOutcome, SimConfig, SimError, SimOutput, Simulation, DEFAULT_STREAM, WORKER_STREAM,
};
pub use trace::{EventKind, TraceEvent, TraceFormat, TraceParseError};
