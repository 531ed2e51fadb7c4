//! Call interposition: every routine call is resolved through the active
//! [`HookTable`] into the host-side steps that realise it.
//!
//! Steps are interpreted by the simulator, which owns streams, the GPU lock
//! and the worker queues. Resolution itself is a pure function of the call,
//! the table and the caller's kernel registry, so one table can be shared by
//! any number of applications.

use thiserror::Error;

use super::args::ArgError;
use super::hook_table::{Behavior, HookTable};
use super::interface::{native_for, Native};
use super::types::{CallPayload, GridError, KernelId, OpKind, RoutineCall, RoutineKind, StreamId};
use crate::strategies::hooks::HookImpl;
use crate::strategies::registry::{KernelRegistry, RegistryConflictError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("call to unhooked symbol `{symbol}`")]
pub struct UnhookedSymbolError {
    pub symbol: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("kernel {0} was never registered")]
pub struct UnknownKernelError(pub KernelId);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DispatchError {
    #[error(transparent)]
    Unhooked(#[from] UnhookedSymbolError),
    #[error("hook table has no entry for `{0}`")]
    NotCovered(String),
    #[error("no hook implementation bound to template `{0}`")]
    UnboundTemplate(String),
    #[error("`{symbol}` cannot take a {kind:?} call")]
    PayloadMismatch { symbol: String, kind: RoutineKind },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    UnknownKernel(#[from] UnknownKernelError),
    #[error(transparent)]
    Registry(#[from] RegistryConflictError),
    #[error(transparent)]
    Args(#[from] ArgError),
}

/// Stream named by a host step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamTarget {
    Stream(StreamId),
    /// The calling application's worker stream.
    Worker,
}

/// One host-side action of a (possibly hooked) routine.
#[derive(Debug, Clone, PartialEq)]
pub enum HostStep {
    /// Host cost of entering the runtime.
    HostCall,
    Enqueue {
        stream: StreamTarget,
        op: OpKind,
    },
    AcquireLock,
    ReleaseLock,
    /// Block until every operation the application enqueued so far completed.
    SyncDevice,
    SyncStream(StreamTarget),
    /// Hand an operation to the application's worker.
    Defer(OpKind),
    /// Block until the worker queue is empty and its last operation completed.
    AwaitWorkerDrained,
}

/// Per-application state consulted while resolving a call.
pub struct DispatchCtx<'a> {
    pub default_stream: StreamId,
    pub registry: &'a mut KernelRegistry,
}

impl DispatchCtx<'_> {
    pub fn stream_of(&self, call: &RoutineCall) -> StreamId {
        call.stream.unwrap_or(self.default_stream)
    }
}

/// Resolves `call` through `table`. Errors leave no side effects.
pub fn dispatch(
    call: &RoutineCall,
    table: &HookTable,
    ctx: &mut DispatchCtx<'_>,
) -> Result<Vec<HostStep>, DispatchError> {
    let behavior = table
        .behavior(&call.symbol)
        .ok_or_else(|| DispatchError::NotCovered(call.symbol.clone()))?;
    match behavior {
        Behavior::ErrorStub => Err(UnhookedSymbolError {
            symbol: call.symbol.clone(),
        }
        .into()),
        Behavior::Trampoline => native_steps(call, ctx),
        Behavior::StrategyHook { template_id } => HookImpl::from_template_id(template_id)
            .ok_or_else(|| DispatchError::UnboundTemplate(template_id.clone()))?
            .expand(call, ctx),
    }
}

/// Builds the Execute or Copy operation a launch or copy call inserts.
pub fn guarded_op(call: &RoutineCall, registry: &KernelRegistry) -> Result<OpKind, DispatchError> {
    match &call.payload {
        CallPayload::KernelLaunch { func, grid, args } => {
            grid.validate()?;
            let info = registry.get(*func).ok_or(UnknownKernelError(*func))?;
            Ok(OpKind::Execute {
                func: *func,
                grid: *grid,
                args: args.clone(),
                work_scale: info.work_scale,
            })
        }
        CallPayload::MemCopy(spec) => Ok(OpKind::Copy(*spec)),
        _ => Err(mismatch(call)),
    }
}

fn mismatch(call: &RoutineCall) -> DispatchError {
    DispatchError::PayloadMismatch {
        symbol: call.symbol.clone(),
        kind: call.kind(),
    }
}

/// Behaviour of the original runtime routine.
pub fn native_steps(
    call: &RoutineCall,
    ctx: &mut DispatchCtx<'_>,
) -> Result<Vec<HostStep>, DispatchError> {
    let stream = StreamTarget::Stream(ctx.stream_of(call));
    let steps = match native_for(&call.symbol) {
        Native::Launch => {
            if call.kind() != RoutineKind::KernelLaunch {
                return Err(mismatch(call));
            }
            let op = guarded_op(call, ctx.registry)?;
            launch_kernel(op, stream)
        }
        Native::Copy { blocking } => {
            let CallPayload::MemCopy(spec) = call.payload else {
                return Err(mismatch(call));
            };
            let mut steps = memcpy(OpKind::Copy(spec), stream);
            if blocking {
                steps.push(HostStep::SyncStream(stream));
            }
            steps
        }
        Native::HostFunc => {
            let CallPayload::HostCallback(f) = call.payload else {
                return Err(mismatch(call));
            };
            launch_host_func(stream, f)
        }
        Native::DeviceSync => device_synchronize(),
        Native::StreamSync => stream_synchronize(stream),
        Native::Marker { blocking } => {
            let mut steps = vec![
                HostStep::HostCall,
                HostStep::Enqueue {
                    stream,
                    op: OpKind::Marker,
                },
            ];
            if blocking {
                steps.push(HostStep::SyncStream(stream));
            }
            steps
        }
        Native::Register => {
            let CallPayload::Register(info) = &call.payload else {
                return Err(mismatch(call));
            };
            ctx.registry.register(info.clone())?;
            vec![HostStep::HostCall]
        }
        Native::HostOnly => vec![HostStep::HostCall],
    };
    Ok(steps)
}

/// Inserts Execute in the stream and returns without waiting.
pub fn launch_kernel(op: OpKind, stream: StreamTarget) -> Vec<HostStep> {
    debug_assert!(matches!(op, OpKind::Execute { .. }));
    vec![HostStep::HostCall, HostStep::Enqueue { stream, op }]
}

/// Inserts Copy in the stream and returns without waiting.
pub fn memcpy(op: OpKind, stream: StreamTarget) -> Vec<HostStep> {
    debug_assert!(matches!(op, OpKind::Copy(_)));
    vec![HostStep::HostCall, HostStep::Enqueue { stream, op }]
}

pub fn launch_host_func(stream: StreamTarget, f: super::types::HostFn) -> Vec<HostStep> {
    vec![
        HostStep::HostCall,
        HostStep::Enqueue {
            stream,
            op: OpKind::Callback(f),
        },
    ]
}

pub fn device_synchronize() -> Vec<HostStep> {
    vec![HostStep::HostCall, HostStep::SyncDevice]
}

pub fn stream_synchronize(stream: StreamTarget) -> Vec<HostStep> {
    vec![HostStep::HostCall, HostStep::SyncStream(stream)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::args::{ArgBlob, ArgLayout};
    use crate::runtime::types::{CopyMode, CopySpec, GridShape, KernelInfo};

    fn registry() -> KernelRegistry {
        let mut r = KernelRegistry::default();
        r.register(KernelInfo {
            id: KernelId(1),
            name: "k1".into(),
            layout: ArgLayout::packed(&[8, 4]),
            work_scale: 1.0,
        })
        .unwrap();
        r
    }

    fn launch() -> RoutineCall {
        RoutineCall::launch(
            KernelId(1),
            GridShape::new(8, 256).unwrap(),
            ArgBlob::new(vec![0; 12]),
        )
    }

    #[test]
    fn trampoline_launch_enqueues_one_execute() {
        let table = HookTable::passthrough(["cudaLaunchKernel"]);
        let mut reg = registry();
        let mut ctx = DispatchCtx {
            default_stream: StreamId(3),
            registry: &mut reg,
        };
        let steps = dispatch(&launch(), &table, &mut ctx).unwrap();
        let enq: Vec<_> = steps
            .iter()
            .filter(|s| matches!(s, HostStep::Enqueue { .. }))
            .collect();
        assert_eq!(enq.len(), 1);
        assert!(matches!(
            enq[0],
            HostStep::Enqueue {
                stream: StreamTarget::Stream(StreamId(3)),
                op: OpKind::Execute { .. }
            }
        ));
        assert!(!steps
            .iter()
            .any(|s| matches!(s, HostStep::SyncDevice | HostStep::SyncStream(_))));
    }

    #[test]
    fn error_stub_raises_unhooked() {
        let mut table = HookTable::new();
        table.insert(
            "cudaGraphLaunch",
            crate::runtime::HookEntry {
                behavior: Behavior::ErrorStub,
                rendered_source: String::new(),
            },
        );
        let mut reg = KernelRegistry::default();
        let mut ctx = DispatchCtx {
            default_stream: StreamId(0),
            registry: &mut reg,
        };
        let err = dispatch(&RoutineCall::other("cudaGraphLaunch"), &table, &mut ctx).unwrap_err();
        assert_eq!(
            err,
            DispatchError::Unhooked(UnhookedSymbolError {
                symbol: "cudaGraphLaunch".into()
            })
        );
    }

    #[test]
    fn uncovered_symbol() {
        let table = HookTable::new();
        let mut reg = registry();
        let mut ctx = DispatchCtx {
            default_stream: StreamId(0),
            registry: &mut reg,
        };
        assert!(matches!(
            dispatch(&launch(), &table, &mut ctx),
            Err(DispatchError::NotCovered(_))
        ));
    }

    #[test]
    fn invalid_grid_and_unknown_kernel() {
        let table = HookTable::passthrough(["cudaLaunchKernel"]);
        let mut reg = registry();
        let mut ctx = DispatchCtx {
            default_stream: StreamId(0),
            registry: &mut reg,
        };
        let bad = RoutineCall {
            payload: CallPayload::KernelLaunch {
                func: KernelId(1),
                grid: GridShape {
                    blocks: 1,
                    threads_per_block: 2048,
                },
                args: ArgBlob::default(),
            },
            ..launch()
        };
        assert!(matches!(
            dispatch(&bad, &table, &mut ctx),
            Err(DispatchError::Grid(GridError::ThreadsPerBlock(2048)))
        ));
        let unknown = RoutineCall::launch(
            KernelId(9),
            GridShape::new(1, 32).unwrap(),
            ArgBlob::default(),
        );
        assert!(matches!(
            dispatch(&unknown, &table, &mut ctx),
            Err(DispatchError::UnknownKernel(_))
        ));
    }

    #[test]
    fn blocking_copy_synchronises_stream() {
        let table = HookTable::passthrough(["cudaMemcpy"]);
        let mut reg = KernelRegistry::default();
        let mut ctx = DispatchCtx {
            default_stream: StreamId(0),
            registry: &mut reg,
        };
        let call = RoutineCall {
            symbol: "cudaMemcpy".into(),
            stream: None,
            payload: CallPayload::MemCopy(CopySpec {
                dst: 0,
                src: 0,
                size_bytes: 0,
                mode: CopyMode::HostToDevice,
            }),
        };
        let steps = dispatch(&call, &table, &mut ctx).unwrap();
        assert_eq!(
            steps.last(),
            Some(&HostStep::SyncStream(StreamTarget::Stream(StreamId(0))))
        );
    }

    #[test]
    fn payload_mismatch() {
        let table = HookTable::passthrough(["cudaLaunchKernel"]);
        let mut reg = KernelRegistry::default();
        let mut ctx = DispatchCtx {
            default_stream: StreamId(0),
            registry: &mut reg,
        };
        let call = RoutineCall::other("cudaLaunchKernel");
        assert!(matches!(
            dispatch(&call, &table, &mut ctx),
            Err(DispatchError::PayloadMismatch { .. })
        ));
    }
}
