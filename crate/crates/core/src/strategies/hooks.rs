//! Hook bodies of the three strategies, expressed as host steps.
//!
//! A hook template in the generated library is bound to one of these by its
//! template id. Copies use the same template as launches.

use crate::runtime::dispatch::{guarded_op, native_steps};
use crate::runtime::{
    native_for, ArgBlob, CallPayload, DispatchCtx, DispatchError, GridShape, HostFn, HostStep,
    KernelId, Native, OpKind, RoutineCall, RoutineKind, StreamTarget, UnknownKernelError,
};

use super::registry::KernelRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HookImpl {
    CallbackLaunch,
    SyncedLaunch,
    WorkerLaunch,
    WorkerOrdered,
    WorkerRegister,
}

impl HookImpl {
    pub const ALL: [HookImpl; 5] = [
        HookImpl::CallbackLaunch,
        HookImpl::SyncedLaunch,
        HookImpl::WorkerLaunch,
        HookImpl::WorkerOrdered,
        HookImpl::WorkerRegister,
    ];

    pub fn template_id(self) -> &'static str {
        match self {
            HookImpl::CallbackLaunch => "callback-launch",
            HookImpl::SyncedLaunch => "synced-launch",
            HookImpl::WorkerLaunch => "worker-launch",
            HookImpl::WorkerOrdered => "worker-ordered",
            HookImpl::WorkerRegister => "worker-register",
        }
    }

    pub fn from_template_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|h| h.template_id() == id)
    }

    pub fn expand(
        self,
        call: &RoutineCall,
        ctx: &mut DispatchCtx<'_>,
    ) -> Result<Vec<HostStep>, DispatchError> {
        let stream = StreamTarget::Stream(ctx.stream_of(call));
        let blocking = matches!(native_for(&call.symbol), Native::Copy { blocking: true });
        match self {
            HookImpl::CallbackLaunch => {
                let mut steps = callback_launch_hook(guarded_op(call, ctx.registry)?, stream);
                if blocking {
                    steps.push(HostStep::SyncStream(stream));
                }
                Ok(steps)
            }
            HookImpl::SyncedLaunch => {
                Ok(synced_launch_hook(guarded_op(call, ctx.registry)?, stream))
            }
            HookImpl::WorkerLaunch => {
                let op = match &call.payload {
                    CallPayload::KernelLaunch { func, grid, args } => {
                        capture_launch(*func, *grid, args.as_bytes(), ctx.registry)?
                    }
                    CallPayload::MemCopy(spec) => OpKind::Copy(*spec),
                    _ => return Err(mismatch(call)),
                };
                let mut steps = worker_launch_hook(op);
                if blocking {
                    steps.push(HostStep::AwaitWorkerDrained);
                }
                Ok(steps)
            }
            HookImpl::WorkerOrdered => Ok(ordered_op_hook(native_steps(call, ctx)?)),
            HookImpl::WorkerRegister => {
                if call.kind() != RoutineKind::Register {
                    return Err(mismatch(call));
                }
                native_steps(call, ctx)
            }
        }
    }
}

fn mismatch(call: &RoutineCall) -> DispatchError {
    DispatchError::PayloadMismatch {
        symbol: call.symbol.clone(),
        kind: call.kind(),
    }
}

/// Acquire callback, the operation, release callback; returns at once.
pub fn callback_launch_hook(op: OpKind, stream: StreamTarget) -> Vec<HostStep> {
    vec![
        HostStep::HostCall,
        HostStep::Enqueue {
            stream,
            op: OpKind::Callback(HostFn::AcquireLock),
        },
        HostStep::Enqueue { stream, op },
        HostStep::Enqueue {
            stream,
            op: OpKind::Callback(HostFn::ReleaseLock),
        },
    ]
}

/// Acquire, insert, wait on the device, release.
pub fn synced_launch_hook(op: OpKind, stream: StreamTarget) -> Vec<HostStep> {
    vec![
        HostStep::HostCall,
        HostStep::AcquireLock,
        HostStep::Enqueue { stream, op },
        HostStep::SyncDevice,
        HostStep::ReleaseLock,
    ]
}

/// Queue the (already copied) operation for the worker and return.
pub fn worker_launch_hook(op: OpKind) -> Vec<HostStep> {
    vec![HostStep::HostCall, HostStep::Defer(op)]
}

/// Copies the caller's arguments per the registered layout so the deferred
/// launch no longer refers to caller memory.
pub fn capture_launch(
    func: KernelId,
    grid: GridShape,
    args: &[u8],
    registry: &KernelRegistry,
) -> Result<OpKind, DispatchError> {
    let info = registry.get(func).ok_or(UnknownKernelError(func))?;
    grid.validate()?;
    Ok(OpKind::Execute {
        func,
        grid,
        args: ArgBlob::deep_copy(args, &info.layout)?,
        work_scale: info.work_scale,
    })
}

/// Wait for the worker to drain, then behave as the original routine on the
/// worker stream, so later deferred operations queue behind it.
pub fn ordered_op_hook(native: Vec<HostStep>) -> Vec<HostStep> {
    let mut steps = Vec::with_capacity(native.len() + 1);
    steps.push(HostStep::AwaitWorkerDrained);
    steps.extend(native.into_iter().map(|step| match step {
        HostStep::Enqueue { op, .. } => HostStep::Enqueue {
            stream: StreamTarget::Worker,
            op,
        },
        HostStep::SyncStream(_) => HostStep::SyncStream(StreamTarget::Worker),
        other => other,
    }));
    steps
}
