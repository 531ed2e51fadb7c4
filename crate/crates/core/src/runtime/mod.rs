//! Mock accelerator runtime: routine calls, streams' operations, and the
//! interposition layer that resolves each call through a [`HookTable`].

pub mod args;
pub mod dispatch;
pub mod hook_table;
pub mod interface;
pub mod plan;
pub mod types;

pub use args::{ArgBlob, ArgError, ArgLayout, ParamSlot};
pub use dispatch::{
    dispatch, DispatchCtx, DispatchError, HostStep, StreamTarget, UnhookedSymbolError,
    UnknownKernelError,
};
pub use hook_table::{Behavior, HookEntry, HookTable};
pub use interface::{native_for, Native, MOCK_DECLARATIONS, MOCK_EXPORTS};
pub use plan::{FixedPlan, PlanSource};
pub use types::*;
