//! Per-operation and per-call records produced by a simulation run.

use serde::{Deserialize, Serialize};

use crate::runtime::{AppId, HostFn, KernelId, OpId, OpKind, StreamId};

/// Which host call (and which part of the workload) produced an operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpTag {
    pub call_seq: u64,
    /// `None` for prelude calls.
    pub inference: Option<u32>,
    pub burst: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpClass {
    Execute,
    Copy,
    AcquireCallback,
    ReleaseCallback,
    Callback,
    Marker,
}

impl OpClass {
    pub fn of(kind: &OpKind) -> Self {
        match kind {
            OpKind::Execute { .. } => OpClass::Execute,
            OpKind::Copy(_) => OpClass::Copy,
            OpKind::Callback(HostFn::AcquireLock) => OpClass::AcquireCallback,
            OpKind::Callback(HostFn::ReleaseLock) => OpClass::ReleaseCallback,
            OpKind::Callback(HostFn::User) => OpClass::Callback,
            OpKind::Marker => OpClass::Marker,
        }
    }

    /// Operations issued by the workload itself, as opposed to lock
    /// callbacks a strategy inserts around them.
    pub fn is_primary(self) -> bool {
        !matches!(self, OpClass::AcquireCallback | OpClass::ReleaseCallback)
    }

    pub fn is_gpu_work(self) -> bool {
        matches!(self, OpClass::Execute | OpClass::Copy)
    }
}

/// Lifetime of one operation. `start`/`end` are `None` when the run stopped
/// before the operation began or finished.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpRecord {
    pub id: OpId,
    pub app: AppId,
    pub stream: StreamId,
    pub class: OpClass,
    pub func: Option<KernelId>,
    pub blocks: u32,
    pub tag: OpTag,
    pub enqueued: u64,
    pub start: Option<u64>,
    pub end: Option<u64>,
    /// Position in the global completion order.
    pub completion: Option<u64>,
    pub cold: bool,
}

impl OpRecord {
    pub fn span(&self) -> Option<(u64, u64)> {
        Some((self.start?, self.end?))
    }

    /// Execution time: first block start to last block end.
    pub fn exec_time(&self) -> Option<u64> {
        self.span().map(|(s, e)| e - s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    pub app: AppId,
    pub seq: u64,
    pub symbol: String,
    pub tag: OpTag,
    /// Synthetic barrier closing a burst.
    pub barrier: bool,
    pub issued_at: u64,
    pub returned_at: Option<u64>,
}
