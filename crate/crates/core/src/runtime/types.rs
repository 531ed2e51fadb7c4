use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::args::{ArgBlob, ArgLayout};

/// Maximum threads a single block may hold.
pub const MAX_THREADS_PER_BLOCK: u32 = 1024;

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident($inner:ty)) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub $inner);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

id_type!(
    /// Application (and GPU context) identifier.
    AppId(u32)
);
id_type!(StreamId(u32));
id_type!(
    /// Globally unique operation instance.
    OpId(u64)
);
id_type!(KernelId(u32));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid must contain at least one block")]
    NoBlocks,
    #[error("{0} threads per block, expected 1..={MAX_THREADS_PER_BLOCK}")]
    ThreadsPerBlock(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    pub blocks: u32,
    pub threads_per_block: u32,
}

impl GridShape {
    pub fn new(blocks: u32, threads_per_block: u32) -> Result<Self, GridError> {
        let grid = Self {
            blocks,
            threads_per_block,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.blocks == 0 {
            return Err(GridError::NoBlocks);
        }
        if self.threads_per_block == 0 || self.threads_per_block > MAX_THREADS_PER_BLOCK {
            return Err(GridError::ThreadsPerBlock(self.threads_per_block));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CopyMode {
    HostToDevice,
    DeviceToHost,
    DeviceToDevice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopySpec {
    pub dst: u64,
    pub src: u64,
    pub size_bytes: u64,
    pub mode: CopyMode,
}

/// Host function run by a stream callback once it reaches the stream head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HostFn {
    AcquireLock,
    ReleaseLock,
    /// Application-provided host work.
    User,
}

/// Host-side registration record for one kernel: what the runtime learns
/// from the registration primitive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelInfo {
    pub id: KernelId,
    pub name: String,
    pub layout: ArgLayout,
    /// Per-block cost relative to `TimingParams::block_base_cycles`.
    pub work_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoutineKind {
    KernelLaunch,
    MemCopy,
    HostCallback,
    DeviceSync,
    StreamSync,
    Other,
    Register,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CallPayload {
    KernelLaunch {
        func: KernelId,
        grid: GridShape,
        args: ArgBlob,
    },
    MemCopy(CopySpec),
    HostCallback(HostFn),
    DeviceSync,
    StreamSync,
    Other,
    Register(KernelInfo),
}

/// One host-side call into the runtime interface.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutineCall {
    pub symbol: String,
    /// `None` selects the calling application's default stream.
    pub stream: Option<StreamId>,
    pub payload: CallPayload,
}

impl RoutineCall {
    pub fn kind(&self) -> RoutineKind {
        match self.payload {
            CallPayload::KernelLaunch { .. } => RoutineKind::KernelLaunch,
            CallPayload::MemCopy(_) => RoutineKind::MemCopy,
            CallPayload::HostCallback(_) => RoutineKind::HostCallback,
            CallPayload::DeviceSync => RoutineKind::DeviceSync,
            CallPayload::StreamSync => RoutineKind::StreamSync,
            CallPayload::Other => RoutineKind::Other,
            CallPayload::Register(_) => RoutineKind::Register,
        }
    }

    pub fn launch(func: KernelId, grid: GridShape, args: ArgBlob) -> Self {
        Self {
            symbol: "cudaLaunchKernel".into(),
            stream: None,
            payload: CallPayload::KernelLaunch { func, grid, args },
        }
    }

    pub fn memcpy_async(spec: CopySpec) -> Self {
        Self {
            symbol: "cudaMemcpyAsync".into(),
            stream: None,
            payload: CallPayload::MemCopy(spec),
        }
    }

    pub fn host_func(f: HostFn) -> Self {
        Self {
            symbol: "cudaLaunchHostFunc".into(),
            stream: None,
            payload: CallPayload::HostCallback(f),
        }
    }

    pub fn device_synchronize() -> Self {
        Self {
            symbol: "cudaDeviceSynchronize".into(),
            stream: None,
            payload: CallPayload::DeviceSync,
        }
    }

    pub fn stream_synchronize(stream: Option<StreamId>) -> Self {
        Self {
            symbol: "cudaStreamSynchronize".into(),
            stream,
            payload: CallPayload::StreamSync,
        }
    }

    pub fn other(symbol: &str) -> Self {
        Self {
            symbol: symbol.into(),
            stream: None,
            payload: CallPayload::Other,
        }
    }

    pub fn register(info: KernelInfo) -> Self {
        Self {
            symbol: "__cudaRegisterFunction".into(),
            stream: None,
            payload: CallPayload::Register(info),
        }
    }

    pub fn on_stream(mut self, stream: StreamId) -> Self {
        self.stream = Some(stream);
        self
    }
}

/// An ordered group of calls, optionally closed by a device-wide barrier.
#[derive(Debug, Clone, PartialEq)]
pub struct Burst {
    pub operations: Vec<RoutineCall>,
    pub terminal_barrier: bool,
}

/// A GPU operation as it sits in a stream.
#[derive(Debug, Clone, PartialEq)]
pub enum OpKind {
    Execute {
        func: KernelId,
        grid: GridShape,
        args: ArgBlob,
        work_scale: f64,
    },
    Copy(CopySpec),
    Callback(HostFn),
    /// Stream-ordered operation with no modeled GPU time (event record,
    /// memset, stream wait).
    Marker,
}

impl OpKind {
    pub fn is_guardable(&self) -> bool {
        matches!(self, OpKind::Execute { .. } | OpKind::Copy(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            OpKind::Execute { .. } => "execute",
            OpKind::Copy(_) => "copy",
            OpKind::Callback(HostFn::AcquireLock) => "acquire-callback",
            OpKind::Callback(HostFn::ReleaseLock) => "release-callback",
            OpKind::Callback(HostFn::User) => "callback",
            OpKind::Marker => "marker",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_limits() {
        assert!(GridShape::new(8, 256).is_ok());
        assert!(GridShape::new(1, 1024).is_ok());
        assert_eq!(
            GridShape::new(1, 2048),
            Err(GridError::ThreadsPerBlock(2048))
        );
        assert_eq!(GridShape::new(0, 32), Err(GridError::NoBlocks));
        assert_eq!(GridShape::new(4, 0), Err(GridError::ThreadsPerBlock(0)));
    }

    #[test]
    fn call_kinds() {
        assert_eq!(
            RoutineCall::device_synchronize().kind(),
            RoutineKind::DeviceSync
        );
        assert_eq!(
            RoutineCall::other("cudaEventRecord").kind(),
            RoutineKind::Other
        );
    }
}
