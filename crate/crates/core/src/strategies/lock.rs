//! The global GPU lock.
//!
//! [`LockState`] is the ownership and FIFO-grant logic on its own, with no
//! blocking. The simulator drives it directly; [`GpuLock`] wraps it for real
//! threads.

use std::collections::VecDeque;
use std::fmt::Debug;
use std::sync::{Condvar, Mutex};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("lock released by {by} while owned by {owner}")]
pub struct LockProtocolError {
    pub by: String,
    pub owner: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acquire {
    Granted,
    Queued,
}

/// Mutual exclusion with FIFO hand-off. `O` identifies an owner, `W` is
/// whatever the caller needs back to resume a waiter once it is granted.
#[derive(Debug, Clone)]
pub struct LockState<O, W = ()> {
    owner: Option<O>,
    waiters: VecDeque<(O, W)>,
}

impl<O, W> Default for LockState<O, W> {
    fn default() -> Self {
        Self {
            owner: None,
            waiters: VecDeque::new(),
        }
    }
}

impl<O: PartialEq + Clone + Debug, W> LockState<O, W> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn acquire(&mut self, who: O, waiter: W) -> Acquire {
        if self.owner.is_none() {
            debug_assert!(self.waiters.is_empty());
            self.owner = Some(who);
            Acquire::Granted
        } else {
            self.waiters.push_back((who, waiter));
            Acquire::Queued
        }
    }

    /// Releases the lock and hands it to the oldest waiter, which is
    /// returned so the caller can resume it.
    pub fn release(&mut self, who: &O) -> Result<Option<(O, W)>, LockProtocolError> {
        match &self.owner {
            Some(owner) if owner == who => {}
            owner => {
                return Err(LockProtocolError {
                    by: format!("{who:?}"),
                    owner: format!("{owner:?}"),
                })
            }
        }
        let next = self.waiters.pop_front();
        self.owner = next.as_ref().map(|(o, _)| o.clone());
        Ok(next)
    }

    pub fn owner(&self) -> Option<&O> {
        self.owner.as_ref()
    }

    pub fn waiting(&self) -> usize {
        self.waiters.len()
    }
}

#[derive(Debug, Default)]
struct Shared {
    state: LockState<usize, u64>,
    next_ticket: u64,
    /// Ticket of the waiter the lock was last handed to.
    handed_to: Option<u64>,
}

/// Blocking, FIFO-fair GPU lock for real threads of control.
#[derive(Debug, Default)]
pub struct GpuLock {
    shared: Mutex<Shared>,
    granted: Condvar,
}

impl GpuLock {
    pub fn new() -> Self {
        Self::default()
    }

    /// Blocks until `app` owns the lock.
    pub fn acquire(&self, app: usize) {
        let mut shared = self.shared.lock().unwrap();
        let ticket = shared.next_ticket;
        shared.next_ticket += 1;
        if shared.state.acquire(app, ticket) == Acquire::Granted {
            return;
        }
        while shared.handed_to != Some(ticket) {
            shared = self.granted.wait(shared).unwrap();
        }
        shared.handed_to = None;
    }

    pub fn release(&self, app: usize) -> Result<(), LockProtocolError> {
        let mut shared = self.shared.lock().unwrap();
        if let Some((_, ticket)) = shared.state.release(&app)? {
            shared.handed_to = Some(ticket);
            self.granted.notify_all();
        }
        Ok(())
    }

    pub fn owner(&self) -> Option<usize> {
        self.shared.lock().unwrap().state.owner().copied()
    }

    pub fn lock(&self, app: usize) -> GpuLockGuard<'_> {
        self.acquire(app);
        GpuLockGuard { lock: self, app }
    }
}

pub struct GpuLockGuard<'a> {
    lock: &'a GpuLock,
    app: usize,
}

impl Drop for GpuLockGuard<'_> {
    fn drop(&mut self) {
        self.lock
            .release(self.app)
            .expect("guard owner holds the lock");
    }
}
