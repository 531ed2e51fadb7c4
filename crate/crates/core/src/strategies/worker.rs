use std::collections::VecDeque;

use crate::runtime::{HostStep, OpKind, StreamId, StreamTarget};

/// Deferred operations of one application, consumed by its worker.
#[derive(Debug, Clone)]
pub struct WorkerQueue<T> {
    pending: VecDeque<T>,
    worker_stream: StreamId,
    in_progress: bool,
}

impl<T> WorkerQueue<T> {
    pub fn new(worker_stream: StreamId) -> Self {
        Self {
            pending: VecDeque::new(),
            worker_stream,
            in_progress: false,
        }
    }

    pub fn worker_stream(&self) -> StreamId {
        self.worker_stream
    }

    pub fn push(&mut self, item: T) {
        self.pending.push_back(item);
    }

    /// Takes the head item; the queue stays undrained until
    /// [`finish`](Self::finish) is called for it.
    pub fn pop(&mut self) -> Option<T> {
        let item = self.pending.pop_front()?;
        self.in_progress = true;
        Some(item)
    }

    pub fn finish(&mut self) {
        self.in_progress = false;
    }

    /// Empty and the last popped item has completed.
    pub fn is_drained(&self) -> bool {
        self.pending.is_empty() && !self.in_progress
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.pending.iter()
    }
}

/// One iteration of the worker loop for a popped operation: acquire the
/// lock, insert into the worker stream, wait for it, release.
/// Operations other than Execute and Copy never reach the worker.
pub fn worker_iteration(op: OpKind) -> Vec<HostStep> {
    if !op.is_guardable() {
        return Vec::new();
    }
    vec![
        HostStep::AcquireLock,
        HostStep::HostCall,
        HostStep::Enqueue {
            stream: StreamTarget::Worker,
            op,
        },
        HostStep::SyncStream(StreamTarget::Worker),
        HostStep::ReleaseLock,
    ]
}
