//! GPU access-control strategies: the global lock, the hook bodies of the
//! callback, synced and worker strategies, the worker queue and the kernel
//! registry the worker needs to copy arguments.

pub mod hooks;
pub mod lock;
pub mod registry;
pub mod worker;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use hooks::HookImpl;
pub use lock::{Acquire, GpuLock, LockProtocolError, LockState};
pub use registry::{KernelRegistry, RegistryConflictError};
pub use worker::{worker_iteration, WorkerQueue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    None,
    Callback,
    Synced,
    Worker,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::None,
        Strategy::Callback,
        Strategy::Synced,
        Strategy::Worker,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Callback => "callback",
            Strategy::Synced => "synced",
            Strategy::Worker => "worker",
        }
    }

    /// Shipped hook configuration, `None` for the unhooked runtime.
    pub fn hook_config(self) -> Option<&'static str> {
        match self {
            Strategy::None => None,
            Strategy::Callback => Some(include_str!("../../assets/hooks/callback.cfg")),
            Strategy::Synced => Some(include_str!("../../assets/hooks/synced.cfg")),
            Strategy::Worker => Some(include_str!("../../assets/hooks/worker.cfg")),
        }
    }

    pub fn uses_worker(self) -> bool {
        self == Strategy::Worker
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown strategy `{0}` (expected none, callback, synced or worker)")]
pub struct ParseStrategyError(pub String);

impl FromStr for Strategy {
    type Err = ParseStrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| ParseStrategyError(s.to_owned()))
    }
}
