//! Trace checks for per-application ordering and barrier preservation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::engine::{CallRecord, OpRecord};
use crate::runtime::{AppId, OpId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// `later` was issued after `earlier` but started before it ended or
    /// completed first.
    Order {
        app: AppId,
        earlier: OpId,
        later: OpId,
    },
    /// An operation crossed the barrier issued as call `barrier_seq`.
    Barrier {
        app: AppId,
        barrier_seq: u64,
        op: OpId,
    },
}

fn primary_ops_by_app(ops: &[OpRecord]) -> BTreeMap<AppId, Vec<&OpRecord>> {
    let mut by_app: BTreeMap<AppId, Vec<&OpRecord>> = BTreeMap::new();
    for op in ops.iter().filter(|o| o.class.is_primary()) {
        by_app.entry(op.app).or_default().push(op);
    }
    for list in by_app.values_mut() {
        list.sort_by_key(|o| (o.tag.call_seq, o.id));
    }
    by_app
}

/// Each application's operations run and complete in issue order.
pub fn check_order(ops: &[OpRecord]) -> Vec<Violation> {
    let mut out = Vec::new();
    for (app, list) in primary_ops_by_app(ops) {
        for w in list.windows(2) {
            let (a, b) = (w[0], w[1]);
            let ok = match (a.end, a.completion, b.start, b.completion) {
                (Some(end), Some(ca), Some(start), cb) => {
                    start >= end && cb.is_none_or(|cb| cb > ca)
                }
                (None, _, None, _) | (Some(_), _, None, _) => true,
                (None, _, Some(_), _) => false,
                (Some(_), None, Some(_), _) => false,
            };
            if !ok {
                out.push(Violation::Order {
                    app,
                    earlier: a.id,
                    later: b.id,
                });
            }
        }
    }
    out
}

/// Every barrier the workload issued held: operations issued before it
/// ended before it returned, operations issued after it started after.
pub fn check_barriers(ops: &[OpRecord], calls: &[CallRecord]) -> Vec<Violation> {
    let by_app = primary_ops_by_app(ops);
    let mut out = Vec::new();
    for call in calls.iter().filter(|c| c.barrier) {
        let Some(ret) = call.returned_at else {
            continue;
        };
        let Some(list) = by_app.get(&call.app) else {
            continue;
        };
        for op in list {
            let crossed = if op.tag.call_seq < call.seq {
                op.end.is_none_or(|e| e > ret)
            } else if op.tag.call_seq > call.seq {
                op.enqueued < ret || op.start.is_some_and(|s| s < ret)
            } else {
                false
            };
            if crossed {
                out.push(Violation::Barrier {
                    app: call.app,
                    barrier_seq: call.seq,
                    op: op.id,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{OpClass, OpTag};
    use crate::runtime::StreamId;

    fn op(id: u64, seq: u64, start: u64, end: u64, completion: u64) -> OpRecord {
        OpRecord {
            id: OpId(id),
            app: AppId(0),
            stream: StreamId(0),
            class: OpClass::Execute,
            func: None,
            blocks: 1,
            tag: OpTag {
                call_seq: seq,
                inference: Some(0),
                burst: 0,
            },
            enqueued: 0,
            start: Some(start),
            end: Some(end),
            completion: Some(completion),
            cold: false,
        }
    }

    #[test]
    fn detects_reordering() {
        let good = [op(0, 0, 0, 10, 0), op(1, 1, 10, 20, 1)];
        assert!(check_order(&good).is_empty());
        let bad = [op(0, 0, 0, 10, 1), op(1, 1, 5, 20, 0)];
        assert_eq!(check_order(&bad).len(), 1);
        let mut pending = op(2, 2, 0, 0, 0);
        pending.start = None;
        pending.end = None;
        pending.completion = None;
        assert!(check_order(&[good[0].clone(), pending.clone()]).is_empty());
        assert_eq!(check_order(&[pending, op(3, 3, 30, 40, 2)]).len(), 1);
    }

    #[test]
    fn detects_barrier_crossing() {
        let barrier = CallRecord {
            app: AppId(0),
            seq: 1,
            symbol: "cudaDeviceSynchronize".into(),
            tag: OpTag {
                call_seq: 1,
                inference: Some(0),
                burst: 0,
            },
            barrier: true,
            issued_at: 5,
            returned_at: Some(12),
        };
        let mut after = op(1, 2, 15, 20, 1);
        after.enqueued = 13;
        assert!(check_barriers(
            &[op(0, 0, 0, 10, 0), after.clone()],
            std::slice::from_ref(&barrier)
        )
        .is_empty());
        after.enqueued = 11;
        assert_eq!(
            check_barriers(&[op(0, 0, 0, 10, 0), after], std::slice::from_ref(&barrier)).len(),
            1
        );
        assert_eq!(check_barriers(&[op(0, 0, 0, 14, 0)], &[barrier]).len(), 1);
    }
}
