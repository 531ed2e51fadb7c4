//! Cross-application overlap of GPU operations.

use std::collections::BTreeMap;

use crate::engine::{EventKind, TraceEvent};
use crate::runtime::{AppId, OpId};

/// Interval during which one application's operation occupied the GPU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub app: AppId,
    pub start: u64,
    pub end: u64,
}

/// One span per kernel or copy in the trace: first block start to last
/// block end.
pub fn op_spans(trace: &[TraceEvent]) -> Vec<Span> {
    let mut by_op: BTreeMap<(AppId, Option<OpId>), (u64, u64)> = BTreeMap::new();
    for e in trace.iter().filter(|e| e.kind.is_gpu_work()) {
        by_op
            .entry((e.app, e.kernel))
            .and_modify(|(s, t)| {
                *s = (*s).min(e.start);
                *t = (*t).max(e.end);
            })
            .or_insert((e.start, e.end));
    }
    by_op
        .into_iter()
        .map(|((app, _), (start, end))| Span { app, start, end })
        .collect()
}

/// Fraction of busy time during which at least two applications have an
/// operation in flight. Zero when nothing ran.
pub fn span_overlap(spans: &[Span]) -> f64 {
    let mut edges: Vec<(u64, bool, AppId)> = Vec::with_capacity(spans.len() * 2);
    for s in spans.iter().filter(|s| s.end > s.start) {
        edges.push((s.start, true, s.app));
        edges.push((s.end, false, s.app));
    }
    // Ends sort before starts at the same instant: touching is not overlap.
    edges.sort_by_key(|&(t, open, app)| (t, open, app));
    let mut active: BTreeMap<AppId, u32> = BTreeMap::new();
    let (mut busy, mut shared) = (0u64, 0u64);
    let mut last = 0u64;
    for (t, open, app) in edges {
        let dt = t - last;
        if !active.is_empty() {
            busy += dt;
        }
        if active.len() >= 2 {
            shared += dt;
        }
        last = t;
        if open {
            *active.entry(app).or_default() += 1;
        } else if let Some(n) = active.get_mut(&app) {
            *n -= 1;
            if *n == 0 {
                active.remove(&app);
            }
        }
    }
    if busy == 0 {
        0.0
    } else {
        shared as f64 / busy as f64
    }
}

pub fn overlap_fraction(trace: &[TraceEvent]) -> f64 {
    span_overlap(&op_spans(trace))
}

/// Whether any two block executions of different applications overlap.
pub fn blocks_exclusive(trace: &[TraceEvent]) -> bool {
    let mut blocks: Vec<&TraceEvent> = trace
        .iter()
        .filter(|e| e.kind == EventKind::BlockExec && e.end > e.start)
        .collect();
    blocks.sort_by_key(|e| (e.start, e.end));
    let mut open: Option<(AppId, u64)> = None;
    for e in blocks {
        match open {
            Some((app, end)) if e.start < end && app != e.app => return false,
            Some((app, end)) if app == e.app => open = Some((app, end.max(e.end))),
            _ => open = Some((e.app, e.end)),
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn span(app: u32, start: u64, end: u64) -> Span {
        Span {
            app: AppId(app),
            start,
            end,
        }
    }

    #[test]
    fn half_overlap_is_a_third() {
        assert_eq!(span_overlap(&[span(0, 0, 10), span(1, 5, 15)]), 1.0 / 3.0);
    }

    #[test]
    fn same_app_and_touching_do_not_count() {
        assert_eq!(span_overlap(&[span(0, 0, 10), span(0, 5, 15)]), 0.0);
        assert_eq!(span_overlap(&[span(0, 0, 10), span(1, 10, 15)]), 0.0);
        assert_eq!(span_overlap(&[]), 0.0);
    }

    /// Brute-force oracle over unit time steps.
    fn oracle(spans: &[Span]) -> f64 {
        let end = spans.iter().map(|s| s.end).max().unwrap_or(0);
        let (mut busy, mut shared) = (0, 0);
        for t in 0..end {
            let mut apps: Vec<AppId> = spans
                .iter()
                .filter(|s| s.start <= t && t < s.end)
                .map(|s| s.app)
                .collect();
            apps.sort();
            apps.dedup();
            busy += u64::from(!apps.is_empty());
            shared += u64::from(apps.len() >= 2);
        }
        if busy == 0 {
            0.0
        } else {
            shared as f64 / busy as f64
        }
    }

    proptest! {
        #[test]
        fn sweep_matches_oracle(raw in proptest::collection::vec((0u32..3, 0u64..200, 0u64..50), 0..20)) {
            let spans: Vec<Span> = raw.iter().map(|&(a, s, l)| span(a, s, s + l)).collect();
            let got = span_overlap(&spans);
            prop_assert!((got - oracle(&spans)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&got));
        }
    }

    #[test]
    fn op_spans_group_blocks() {
        let ev = |app: u32, op: u64, start: u64, end: u64, kind| TraceEvent {
            app: AppId(app),
            kernel: Some(OpId(op)),
            block: None,
            sm: None,
            start,
            end,
            kind,
        };
        let trace = [
            ev(0, 1, 0, 5, EventKind::BlockExec),
            ev(0, 1, 5, 10, EventKind::BlockExec),
            ev(1, 2, 3, 4, EventKind::Callback),
            ev(1, 3, 10, 12, EventKind::Copy),
        ];
        assert_eq!(op_spans(&trace), vec![span(0, 0, 10), span(1, 10, 12)]);
        assert_eq!(overlap_fraction(&trace), 0.0);
        assert!(blocks_exclusive(&trace));
    }
}
