//! Discrete-event simulation of applications sharing one GPU.
//!
//! Every application runs as a simulated host process that resolves its
//! calls through the hook table and interprets the resulting [`HostStep`]s.
//! Host blocking (barriers, lock waits, worker drains) parks the process
//! until the engine observes the awaited condition. Under the worker
//! strategy each application also gets a worker process running the worker
//! loop over its [`WorkerQueue`].
//!
//! The GPU executes one context at a time. When the active context has run
//! for `timeslice_cycles` and another context has work, it stops dispatching,
//! drains and hands over, paying `context_switch_cycles`; handing over from a
//! context with nothing left to run costs `idle_switch_cycles`. The first
//! kernel executed after a switch runs with `cold_penalty_factor`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::params::{GpuShape, ParamsError, TimingParams};
use super::records::{CallRecord, OpClass, OpRecord, OpTag};
use super::scheduler::{block_cycles, schedule_blocks};
use super::trace::{EventKind, TraceEvent};
use crate::runtime::{
    dispatch, AppId, DispatchCtx, DispatchError, HookTable, HostFn, HostStep, OpId, OpKind,
    PlanSource, RoutineCall, StreamId, StreamTarget,
};
use crate::strategies::{
    worker_iteration, Acquire, KernelRegistry, LockProtocolError, LockState, WorkerQueue,
};

/// Stream every application's calls go to unless they name another.
pub const DEFAULT_STREAM: StreamId = StreamId(0);
/// Stream the worker inserts deferred operations into.
pub const WORKER_STREAM: StreamId = StreamId(u32::MAX);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("app {app}: `{symbol}`: {source}")]
    Dispatch {
        app: AppId,
        symbol: String,
        source: DispatchError,
    },
    #[error(transparent)]
    Lock(#[from] LockProtocolError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("deadlock at cycle {time}: apps {stuck:?} can make no progress")]
    Deadlock { time: u64, stuck: Vec<AppId> },
    #[error("event budget of {0} exhausted")]
    EventBudget(u64),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub timing: TimingParams,
    pub shape: GpuShape,
    pub seed: u64,
    pub table: HookTable,
    /// Stop once simulated time passes this cycle; `None` runs to completion.
    pub horizon: Option<u64>,
    pub event_budget: u64,
}

impl SimConfig {
    pub fn new(timing: TimingParams, table: HookTable, seed: u64) -> Self {
        Self {
            timing,
            shape: GpuShape::default(),
            seed,
            table,
            horizon: None,
            event_budget: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppOutcome {
    pub id: AppId,
    /// Return time of the last call, if the plan ran out.
    pub finished_at: Option<u64>,
    /// Completion time of every inference, in order.
    pub inferences: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    /// Kept out of serialized results; exported separately as a chronogram.
    #[serde(skip)]
    pub trace: Vec<TraceEvent>,
    pub ops: Vec<OpRecord>,
    pub calls: Vec<CallRecord>,
    pub apps: Vec<AppOutcome>,
    pub context_switches: u64,
    pub end_time: u64,
    pub events: u64,
}

impl SimOutput {
    /// Time at which every application had finished its plan.
    pub fn makespan(&self) -> Option<u64> {
        self.apps.iter().map(|a| a.finished_at).max().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Event {
    HostWake(usize),
    BlocksDone { op: OpId, sms: Vec<u32> },
    CopyDone(OpId),
    CallbackStep(OpId),
    SwitchDone,
    SliceExpire,
}

#[derive(Debug, PartialEq, Eq)]
struct Scheduled {
    time: u64,
    seq: u64,
    event: Event,
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Waiter {
    Proc { pid: usize, since: u64 },
    Callback { op: OpId, since: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Wait {
    Lock,
    /// Every operation of the app below this id is done.
    App(OpId),
    Stream(StreamId, OpId),
    WorkerDrained,
    WorkerWork,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Ready,
    Sleeping,
    Blocked(Wait),
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Main,
    Worker,
}

#[derive(Debug)]
struct CallCtx {
    record: usize,
    tag: OpTag,
    last_of_inference: bool,
}

#[derive(Debug)]
struct Proc {
    app: usize,
    role: Role,
    steps: VecDeque<HostStep>,
    status: Status,
    call: Option<CallCtx>,
    /// Tag of the deferred operation the worker is handling.
    worker_tag: Option<OpTag>,
}

struct Pending {
    call: RoutineCall,
    tag: OpTag,
    barrier: bool,
    last_of_inference: bool,
}

struct App {
    id: AppId,
    plan: Box<dyn PlanSource>,
    pending: VecDeque<Pending>,
    prelude_done: bool,
    next_inference: u32,
    streams: BTreeMap<StreamId, VecDeque<OpId>>,
    undone: BTreeSet<OpId>,
    registry: KernelRegistry,
    worker: WorkerQueue<(OpKind, OpTag)>,
    next_seq: u64,
    finished_at: Option<u64>,
    inferences: Vec<u64>,
}

struct Op {
    app: usize,
    stream: StreamId,
    kind: OpKind,
    tag: OpTag,
    enqueued: u64,
    start: Option<u64>,
    end: Option<u64>,
    completion: Option<u64>,
    dispatched: u32,
    completed: u32,
    block_cycles: u64,
    jitter: f64,
    cold: bool,
}

impl Op {
    fn blocks(&self) -> u32 {
        match &self.kind {
            OpKind::Execute { grid, .. } => grid.blocks,
            _ => 0,
        }
    }
}

struct Gpu {
    resident: Vec<u32>,
    running_copies: u32,
    active: Option<usize>,
    switching_to: Option<usize>,
    slice_start: u64,
    cold_next: bool,
}

impl Gpu {
    fn drained(&self) -> bool {
        self.running_copies == 0 && self.resident.iter().all(|&n| n == 0)
    }
}

pub struct Simulation {
    cfg: SimConfig,
    now: u64,
    seq: u64,
    events: u64,
    queue: BinaryHeap<Scheduled>,
    rng: ChaCha8Rng,
    apps: Vec<App>,
    procs: Vec<Proc>,
    ops: Vec<Op>,
    calls: Vec<CallRecord>,
    trace: Vec<TraceEvent>,
    lock: LockState<usize, Waiter>,
    gpu: Gpu,
    completions: u64,
    context_switches: u64,
}

impl Simulation {
    pub fn new(cfg: SimConfig, plans: Vec<Box<dyn PlanSource>>) -> Result<Self, SimError> {
        cfg.timing.validate()?;
        cfg.shape.validate()?;
        let mut procs = Vec::new();
        let apps = plans
            .into_iter()
            .enumerate()
            .map(|(i, plan)| {
                for role in [Role::Main, Role::Worker] {
                    procs.push(Proc {
                        app: i,
                        role,
                        steps: VecDeque::new(),
                        status: Status::Ready,
                        call: None,
                        worker_tag: None,
                    });
                }
                App {
                    id: AppId(i as u32),
                    plan,
                    pending: VecDeque::new(),
                    prelude_done: false,
                    next_inference: 0,
                    streams: BTreeMap::new(),
                    undone: BTreeSet::new(),
                    registry: KernelRegistry::default(),
                    worker: WorkerQueue::new(WORKER_STREAM),
                    next_seq: 0,
                    finished_at: None,
                    inferences: Vec::new(),
                }
            })
            .collect();
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            gpu: Gpu {
                resident: vec![0; cfg.shape.sm_count as usize],
                running_copies: 0,
                active: None,
                switching_to: None,
                slice_start: 0,
                cold_next: false,
            },
            cfg,
            now: 0,
            seq: 0,
            events: 0,
            queue: BinaryHeap::new(),
            apps,
            procs,
            ops: Vec::new(),
            calls: Vec::new(),
            trace: Vec::new(),
            lock: LockState::new(),
            completions: 0,
            context_switches: 0,
        })
    }

    pub fn run(mut self) -> Result<SimOutput, SimError> {
        loop {
            self.settle()?;
            let Some(next) = self.queue.pop() else {
                let stuck: Vec<AppId> = self
                    .procs
                    .iter()
                    .filter(|p| p.role == Role::Main && p.status != Status::Done)
                    .map(|p| self.apps[p.app].id)
                    .collect();
                if stuck.is_empty() {
                    break;
                }
                return Err(SimError::Deadlock {
                    time: self.now,
                    stuck,
                });
            };
            if self.cfg.horizon.is_some_and(|h| next.time > h) {
                self.now = self.cfg.horizon.unwrap_or(next.time);
                break;
            }
            self.events += 1;
            if self.events > self.cfg.event_budget {
                return Err(SimError::EventBudget(self.cfg.event_budget));
            }
            debug_assert!(next.time >= self.now);
            self.now = next.time;
            self.handle(next.event)?;
        }
        Ok(self.finish())
    }

    fn finish(self) -> SimOutput {
        let ops = self
            .ops
            .iter()
            .enumerate()
            .map(|(i, op)| OpRecord {
                id: OpId(i as u64),
                app: self.apps[op.app].id,
                stream: op.stream,
                class: OpClass::of(&op.kind),
                func: match &op.kind {
                    OpKind::Execute { func, .. } => Some(*func),
                    _ => None,
                },
                blocks: op.blocks(),
                tag: op.tag,
                enqueued: op.enqueued,
                start: op.start,
                end: op.end,
                completion: op.completion,
                cold: op.cold,
            })
            .collect();
        SimOutput {
            trace: self.trace,
            ops,
            calls: self.calls,
            apps: self
                .apps
                .into_iter()
                .map(|a| AppOutcome {
                    id: a.id,
                    finished_at: a.finished_at,
                    inferences: a.inferences,
                })
                .collect(),
            context_switches: self.context_switches,
            end_time: self.now,
            events: self.events,
        }
    }

    fn schedule(&mut self, delay: u64, event: Event) {
        self.seq += 1;
        self.queue.push(Scheduled {
            time: self.now + delay,
            seq: self.seq,
            event,
        });
    }

    fn handle(&mut self, event: Event) -> Result<(), SimError> {
        match event {
            Event::HostWake(pid) => self.procs[pid].status = Status::Ready,
            Event::BlocksDone { op, sms } => {
                for sm in &sms {
                    self.gpu.resident[*sm as usize] -= 1;
                }
                let o = &mut self.ops[op.index()];
                o.completed += sms.len() as u32;
                if o.completed == o.blocks() {
                    self.complete_op(op);
                }
            }
            Event::CopyDone(op) => {
                self.gpu.running_copies -= 1;
                self.complete_op(op);
            }
            Event::CallbackStep(op) => self.run_callback(op)?,
            Event::SwitchDone => {
                let to = self.gpu.switching_to.take().expect("switch in progress");
                self.activate(to);
            }
            Event::SliceExpire => {}
        }
        Ok(())
    }

    /// Runs host processes and the GPU front end until nothing changes at
    /// the current instant.
    fn settle(&mut self) -> Result<(), SimError> {
        loop {
            let mut progress = false;
            for pid in 0..self.procs.len() {
                progress |= self.run_proc(pid)?;
            }
            progress |= self.pump();
            if !progress {
                return Ok(());
            }
        }
    }

    fn wait_satisfied(&self, pid: usize, wait: Wait) -> bool {
        let app = &self.apps[self.procs[pid].app];
        match wait {
            Wait::Lock => false,
            Wait::App(bound) => app.undone.first().is_none_or(|&id| id >= bound),
            Wait::Stream(stream, bound) => app
                .streams
                .get(&stream)
                .and_then(|q| q.front())
                .is_none_or(|&id| id >= bound),
            Wait::WorkerDrained => app.worker.is_drained(),
            Wait::WorkerWork => !app.worker.is_empty(),
        }
    }

    fn run_proc(&mut self, pid: usize) -> Result<bool, SimError> {
        let mut progress = false;
        loop {
            match self.procs[pid].status {
                Status::Ready => {}
                Status::Blocked(wait) if self.wait_satisfied(pid, wait) => {
                    self.procs[pid].status = Status::Ready;
                }
                _ => return Ok(progress),
            }
            progress = true;
            if let Some(step) = self.procs[pid].steps.pop_front() {
                self.exec(pid, step)?;
                continue;
            }
            match self.procs[pid].role {
                Role::Main => self.next_call(pid)?,
                Role::Worker => self.next_deferred(pid),
            }
            if matches!(
                self.procs[pid].status,
                Status::Done | Status::Blocked(Wait::WorkerWork)
            ) {
                return Ok(true);
            }
        }
    }

    fn next_call(&mut self, pid: usize) -> Result<(), SimError> {
        let now = self.now;
        let a = self.procs[pid].app;
        if let Some(done) = self.procs[pid].call.take() {
            self.calls[done.record].returned_at = Some(now);
            if done.last_of_inference {
                self.apps[a].inferences.push(now);
            }
        }
        let Some(next) = self.pull_call(a) else {
            self.apps[a].finished_at = Some(now);
            self.procs[pid].status = Status::Done;
            return Ok(());
        };
        let app = &mut self.apps[a];
        let mut ctx = DispatchCtx {
            default_stream: DEFAULT_STREAM,
            registry: &mut app.registry,
        };
        let steps = dispatch(&next.call, &self.cfg.table, &mut ctx).map_err(|source| {
            SimError::Dispatch {
                app: app.id,
                symbol: next.call.symbol.clone(),
                source,
            }
        })?;
        self.calls.push(CallRecord {
            app: app.id,
            seq: next.tag.call_seq,
            symbol: next.call.symbol,
            tag: next.tag,
            barrier: next.barrier,
            issued_at: now,
            returned_at: None,
        });
        let proc = &mut self.procs[pid];
        proc.steps = steps.into();
        proc.call = Some(CallCtx {
            record: self.calls.len() - 1,
            tag: next.tag,
            last_of_inference: next.last_of_inference,
        });
        Ok(())
    }

    fn pull_call(&mut self, a: usize) -> Option<Pending> {
        let app = &mut self.apps[a];
        if app.pending.is_empty() {
            if !app.prelude_done {
                app.prelude_done = true;
                for call in app.plan.prelude() {
                    let tag = OpTag {
                        call_seq: 0,
                        inference: None,
                        burst: 0,
                    };
                    app.pending.push_back(Pending {
                        call,
                        tag,
                        barrier: false,
                        last_of_inference: false,
                    });
                }
            }
            if app.pending.is_empty() {
                let bursts = app.plan.next_inference()?;
                let inference = app.next_inference;
                app.next_inference += 1;
                for (b, burst) in bursts.into_iter().enumerate() {
                    let tag = OpTag {
                        call_seq: 0,
                        inference: Some(inference),
                        burst: b as u32,
                    };
                    for call in burst.operations {
                        app.pending.push_back(Pending {
                            call,
                            tag,
                            barrier: false,
                            last_of_inference: false,
                        });
                    }
                    if burst.terminal_barrier {
                        app.pending.push_back(Pending {
                            call: RoutineCall::device_synchronize(),
                            tag,
                            barrier: true,
                            last_of_inference: false,
                        });
                    }
                }
                if let Some(last) = app.pending.back_mut() {
                    last.last_of_inference = true;
                } else {
                    // An empty inference completes immediately.
                    app.inferences.push(self.now);
                    return self.pull_call(a);
                }
            }
        }
        let mut next = app.pending.pop_front()?;
        next.tag.call_seq = app.next_seq;
        app.next_seq += 1;
        Some(next)
    }

    fn next_deferred(&mut self, pid: usize) {
        let a = self.procs[pid].app;
        if self.procs[pid].worker_tag.take().is_some() {
            self.apps[a].worker.finish();
        }
        match self.apps[a].worker.pop() {
            Some((op, tag)) => {
                let proc = &mut self.procs[pid];
                proc.worker_tag = Some(tag);
                proc.steps = worker_iteration(op).into();
                if proc.steps.is_empty() {
                    self.apps[a].worker.finish();
                    proc.worker_tag = None;
                }
            }
            None => self.procs[pid].status = Status::Blocked(Wait::WorkerWork),
        }
    }

    fn exec(&mut self, pid: usize, step: HostStep) -> Result<(), SimError> {
        let a = self.procs[pid].app;
        match step {
            HostStep::HostCall => {
                self.procs[pid].status = Status::Sleeping;
                self.schedule(self.cfg.timing.host_call_cycles, Event::HostWake(pid));
            }
            HostStep::Enqueue { stream, op } => {
                let tag = self.current_tag(pid);
                self.enqueue(a, resolve(stream), op, tag);
            }
            HostStep::AcquireLock => {
                let since = self.now;
                match self.lock.acquire(a, Waiter::Proc { pid, since }) {
                    Acquire::Granted => self.lock_event(a, None, since, EventKind::LockAcquire),
                    Acquire::Queued => self.procs[pid].status = Status::Blocked(Wait::Lock),
                }
            }
            HostStep::ReleaseLock => self.release_lock(a, None)?,
            HostStep::SyncDevice => {
                let bound = OpId(self.ops.len() as u64);
                self.procs[pid].status = Status::Blocked(Wait::App(bound));
            }
            HostStep::SyncStream(target) => {
                let bound = OpId(self.ops.len() as u64);
                self.procs[pid].status = Status::Blocked(Wait::Stream(resolve(target), bound));
            }
            HostStep::Defer(op) => {
                let tag = self.current_tag(pid);
                self.apps[a].worker.push((op, tag));
            }
            HostStep::AwaitWorkerDrained => {
                self.procs[pid].status = Status::Blocked(Wait::WorkerDrained);
            }
        }
        Ok(())
    }

    fn current_tag(&self, pid: usize) -> OpTag {
        let proc = &self.procs[pid];
        proc.worker_tag
            .or(proc.call.as_ref().map(|c| c.tag))
            .expect("steps run inside a call")
    }

    fn enqueue(&mut self, a: usize, stream: StreamId, kind: OpKind, tag: OpTag) {
        let id = OpId(self.ops.len() as u64);
        self.ops.push(Op {
            app: a,
            stream,
            kind,
            tag,
            enqueued: self.now,
            start: None,
            end: None,
            completion: None,
            dispatched: 0,
            completed: 0,
            block_cycles: 0,
            jitter: 1.0,
            cold: false,
        });
        let app = &mut self.apps[a];
        app.streams.entry(stream).or_default().push_back(id);
        app.undone.insert(id);
    }

    fn complete_op(&mut self, id: OpId) {
        let now = self.now;
        let op = &mut self.ops[id.index()];
        op.end = Some(now);
        op.completion = Some(self.completions);
        self.completions += 1;
        let (a, stream) = (op.app, op.stream);
        if let OpKind::Callback(_) = op.kind {
            let start = op.start.unwrap_or(now);
            self.trace.push(TraceEvent {
                app: self.apps[a].id,
                kernel: Some(id),
                block: None,
                sm: None,
                start,
                end: now,
                kind: EventKind::Callback,
            });
        }
        let app = &mut self.apps[a];
        let head = app.streams.get_mut(&stream).and_then(|q| q.pop_front());
        debug_assert_eq!(head, Some(id), "operations complete in stream order");
        app.undone.remove(&id);
    }

    fn lock_event(&mut self, a: usize, op: Option<OpId>, since: u64, kind: EventKind) {
        self.trace.push(TraceEvent {
            app: self.apps[a].id,
            kernel: op,
            block: None,
            sm: None,
            start: since,
            end: self.now,
            kind,
        });
    }

    fn release_lock(&mut self, a: usize, op: Option<OpId>) -> Result<(), SimError> {
        let next = self.lock.release(&a)?;
        self.lock_event(a, op, self.now, EventKind::LockRelease);
        if let Some((owner, waiter)) = next {
            match waiter {
                Waiter::Proc { pid, since } => {
                    self.lock_event(owner, None, since, EventKind::LockAcquire);
                    self.procs[pid].status = Status::Ready;
                }
                Waiter::Callback { op, since } => {
                    self.lock_event(owner, Some(op), since, EventKind::LockAcquire);
                    self.complete_op(op);
                }
            }
        }
        Ok(())
    }

    fn run_callback(&mut self, id: OpId) -> Result<(), SimError> {
        let a = self.ops[id.index()].app;
        let OpKind::Callback(f) = self.ops[id.index()].kind else {
            unreachable!("callback step for a non-callback operation");
        };
        match f {
            HostFn::AcquireLock => {
                let since = self.now;
                if self.lock.acquire(a, Waiter::Callback { op: id, since }) == Acquire::Granted {
                    self.lock_event(a, Some(id), since, EventKind::LockAcquire);
                    self.complete_op(id);
                }
            }
            HostFn::ReleaseLock => {
                self.release_lock(a, Some(id))?;
                self.complete_op(id);
            }
            HostFn::User => self.complete_op(id),
        }
        Ok(())
    }

    fn activate(&mut self, to: usize) {
        self.gpu.active = Some(to);
        self.gpu.slice_start = self.now;
        self.schedule(self.cfg.timing.timeslice_cycles, Event::SliceExpire);
    }

    /// Whether app `a` has a stream head that needs its context to run.
    fn wants_gpu(&self, a: usize) -> bool {
        self.apps[a].streams.values().any(|q| {
            q.front().is_some_and(|&id| {
                let op = &self.ops[id.index()];
                match op.kind {
                    OpKind::Marker => false,
                    OpKind::Execute { .. } => op.dispatched < op.blocks(),
                    _ => op.start.is_none(),
                }
            })
        })
    }

    /// Starts whatever can start at the current instant. Returns whether
    /// anything changed.
    fn pump(&mut self) -> bool {
        let mut progress = self.complete_markers();
        if self.gpu.switching_to.is_some() {
            return progress;
        }
        let wants: Vec<bool> = (0..self.apps.len()).map(|a| self.wants_gpu(a)).collect();
        let Some(x) = self.gpu.active else {
            if let Some(first) = wants.iter().position(|&w| w) {
                self.activate(first);
                self.dispatch(first);
                return true;
            }
            return progress;
        };
        let n = self.apps.len();
        let other = (1..n).map(|d| (x + d) % n).find(|&a| wants[a]);
        if let Some(y) = other {
            let expired = self.now >= self.gpu.slice_start + self.cfg.timing.timeslice_cycles;
            if !wants[x] || expired {
                if self.gpu.drained() {
                    self.begin_switch(x, y, wants[x]);
                    return true;
                }
                return progress;
            }
        }
        if wants[x] {
            progress |= self.dispatch(x);
        }
        progress
    }

    fn complete_markers(&mut self) -> bool {
        let mut done = Vec::new();
        for app in &self.apps {
            for q in app.streams.values() {
                if let Some(&id) = q.front() {
                    if matches!(self.ops[id.index()].kind, OpKind::Marker) {
                        done.push(id);
                    }
                }
            }
        }
        for &id in &done {
            self.ops[id.index()].start = Some(self.now);
            self.complete_op(id);
        }
        !done.is_empty()
    }

    fn begin_switch(&mut self, from: usize, to: usize, from_busy: bool) {
        let cost = if from_busy {
            self.cfg.timing.context_switch_cycles
        } else {
            self.cfg.timing.idle_switch_cycles
        };
        self.context_switches += 1;
        self.trace.push(TraceEvent {
            app: self.apps[to].id,
            kernel: None,
            block: None,
            sm: None,
            start: self.now,
            end: self.now + cost,
            kind: EventKind::ContextSwitch,
        });
        self.gpu.active = None;
        self.gpu.switching_to = Some(to);
        self.gpu.cold_next = from != to;
        self.schedule(cost, Event::SwitchDone);
    }

    fn dispatch(&mut self, a: usize) -> bool {
        let heads: Vec<OpId> = self.apps[a]
            .streams
            .values()
            .filter_map(|q| q.front().copied())
            .collect();
        let mut progress = false;
        for id in heads {
            progress |= self.start_or_continue(id);
        }
        progress
    }

    fn start_or_continue(&mut self, id: OpId) -> bool {
        let now = self.now;
        let op = &self.ops[id.index()];
        let app = self.apps[op.app].id;
        match &op.kind {
            OpKind::Marker => false,
            _ if op.start.is_some() && !matches!(op.kind, OpKind::Execute { .. }) => false,
            OpKind::Callback(_) => {
                self.ops[id.index()].start = Some(now);
                self.schedule(
                    self.cfg.timing.callback_host_cycles,
                    Event::CallbackStep(id),
                );
                true
            }
            OpKind::Copy(spec) => {
                let cycles =
                    (spec.size_bytes as f64 * self.cfg.timing.copy_cycles_per_byte).round() as u64;
                self.ops[id.index()].start = Some(now);
                self.gpu.running_copies += 1;
                self.trace.push(TraceEvent {
                    app,
                    kernel: Some(id),
                    block: None,
                    sm: None,
                    start: now,
                    end: now + cycles,
                    kind: EventKind::Copy,
                });
                self.schedule(cycles, Event::CopyDone(id));
                true
            }
            OpKind::Execute {
                work_scale, grid, ..
            } => {
                let remaining = grid.blocks - op.dispatched;
                if remaining == 0 {
                    return false;
                }
                let work_scale = *work_scale;
                let max = self.cfg.shape.max_blocks_per_sm;
                let placement = schedule_blocks(remaining, &mut self.gpu.resident, max);
                if placement.placed.is_empty() {
                    return false;
                }
                let timing = &self.cfg.timing;
                let op = &mut self.ops[id.index()];
                if op.start.is_none() {
                    op.start = Some(now);
                    let j = timing.jitter;
                    if j > 0.0 {
                        op.jitter = self.rng.gen_range(1.0 - j..=1.0 + j);
                    }
                }
                if self.gpu.cold_next {
                    self.gpu.cold_next = false;
                    op.cold = true;
                }
                let cold = if op.cold {
                    timing.cold_penalty_factor
                } else {
                    1.0
                };
                let cycles = block_cycles(timing.block_base_cycles, work_scale, cold, op.jitter);
                op.block_cycles = cycles;
                let first = op.dispatched;
                op.dispatched += placement.placed.len() as u32;
                self.trace.extend(
                    placement
                        .placed
                        .iter()
                        .enumerate()
                        .map(|(i, &sm)| TraceEvent {
                            app,
                            kernel: Some(id),
                            block: Some(first + i as u32),
                            sm: Some(sm),
                            start: now,
                            end: now + cycles,
                            kind: EventKind::BlockExec,
                        }),
                );
                self.schedule(
                    cycles,
                    Event::BlocksDone {
                        op: id,
                        sms: placement.placed,
                    },
                );
                true
            }
        }
    }
}

fn resolve(target: StreamTarget) -> StreamId {
    match target {
        StreamTarget::Stream(s) => s,
        StreamTarget::Worker => WORKER_STREAM,
    }
}
