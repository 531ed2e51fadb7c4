//! Chronogram records and their CSV / JSON forms.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::runtime::{AppId, OpId};

pub const CSV_HEADER: &str = "app,kernel,block,sm,start,end,kind";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    Csv,
    Json,
}

impl TraceFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TraceFormat::Csv => "csv",
            TraceFormat::Json => "json",
        }
    }

    pub fn render(self, events: &[TraceEvent]) -> String {
        match self {
            TraceFormat::Csv => to_csv(events),
            TraceFormat::Json => to_json(events),
        }
    }

    pub fn parse(self, text: &str) -> Result<Vec<TraceEvent>, TraceParseError> {
        match self {
            TraceFormat::Csv => from_csv(text),
            TraceFormat::Json => {
                serde_json::from_str(text).map_err(|e| TraceParseError::Field(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    BlockExec,
    Copy,
    ContextSwitch,
    LockAcquire,
    LockRelease,
    Callback,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::BlockExec => "block-exec",
            EventKind::Copy => "copy",
            EventKind::ContextSwitch => "context-switch",
            EventKind::LockAcquire => "lock-acquire",
            EventKind::LockRelease => "lock-release",
            EventKind::Callback => "callback",
        }
    }

    /// Whether the event occupies the GPU's execution resources.
    pub fn is_gpu_work(self) -> bool {
        matches!(self, EventKind::BlockExec | EventKind::Copy)
    }
}

impl FromStr for EventKind {
    type Err = TraceParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "block-exec" => EventKind::BlockExec,
            "copy" => EventKind::Copy,
            "context-switch" => EventKind::ContextSwitch,
            "lock-acquire" => EventKind::LockAcquire,
            "lock-release" => EventKind::LockRelease,
            "callback" => EventKind::Callback,
            other => return Err(TraceParseError::Field(other.to_owned())),
        })
    }
}

/// One interval of the chronogram. `kernel` names the operation instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub app: AppId,
    pub kernel: Option<OpId>,
    pub block: Option<u32>,
    pub sm: Option<u32>,
    pub start: u64,
    pub end: u64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceParseError {
    #[error("missing or wrong CSV header")]
    Header,
    #[error("line {0}: expected 7 fields")]
    Arity(usize),
    #[error("bad field `{0}`")]
    Field(String),
    #[error("line {0}: end precedes start")]
    Interval(usize),
}

fn opt<T: std::fmt::Display>(out: &mut String, v: Option<T>) {
    if let Some(v) = v {
        let _ = write!(out, "{v}");
    }
}

pub fn write_csv_row(out: &mut String, e: &TraceEvent) {
    let _ = write!(out, "{},", e.app);
    opt(out, e.kernel);
    out.push(',');
    opt(out, e.block);
    out.push(',');
    opt(out, e.sm);
    let _ = writeln!(out, ",{},{},{}", e.start, e.end, e.kind.as_str());
}

pub fn to_csv(events: &[TraceEvent]) -> String {
    let mut out = String::with_capacity(32 * (events.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for e in events {
        write_csv_row(&mut out, e);
    }
    out
}

pub fn to_json(events: &[TraceEvent]) -> String {
    serde_json::to_string(events).expect("trace events serialize")
}

fn parse_opt<T: FromStr>(s: &str) -> Result<Option<T>, TraceParseError> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| TraceParseError::Field(s.to_owned()))
}

fn parse<T: FromStr>(s: &str) -> Result<T, TraceParseError> {
    s.parse().map_err(|_| TraceParseError::Field(s.to_owned()))
}

pub fn from_csv(text: &str) -> Result<Vec<TraceEvent>, TraceParseError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err(TraceParseError::Header);
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(TraceParseError::Arity(i + 2));
        }
        let e = TraceEvent {
            app: AppId(parse(f[0])?),
            kernel: parse_opt::<u64>(f[1])?.map(OpId),
            block: parse_opt(f[2])?,
            sm: parse_opt(f[3])?,
            start: parse(f[4])?,
            end: parse(f[5])?,
            kind: f[6].trim().parse()?,
        };
        if e.end < e.start {
            return Err(TraceParseError::Interval(i + 2));
        }
        out.push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kind() -> impl Strategy<Value = EventKind> {
        prop_oneof![
            Just(EventKind::BlockExec),
            Just(EventKind::Copy),
            Just(EventKind::ContextSwitch),
            Just(EventKind::LockAcquire),
            Just(EventKind::LockRelease),
            Just(EventKind::Callback),
        ]
    }

    prop_compose! {
        fn event()(app in 0u32..4, kernel in proptest::option::of(0u64..1000),
                   block in proptest::option::of(0u32..600), sm in proptest::option::of(0u32..8),
                   start in 0u64..1_000_000, len in 0u64..10_000, kind in kind()) -> TraceEvent {
            TraceEvent { app: AppId(app), kernel: kernel.map(OpId), block, sm, start, end: start + len, kind }
        }
    }

    proptest! {
        #[test]
        fn csv_roundtrip(events in proptest::collection::vec(event(), 0..50)) {
            prop_assert_eq!(from_csv(&to_csv(&events)).unwrap(), events);
        }
    }

    #[test]
    fn csv_layout() {
        let e = TraceEvent {
            app: AppId(1),
            kernel: Some(OpId(7)),
            block: Some(3),
            sm: Some(0),
            start: 10,
            end: 20,
            kind: EventKind::BlockExec,
        };
        let sw = TraceEvent {
            kernel: None,
            block: None,
            sm: None,
            kind: EventKind::ContextSwitch,
            ..e
        };
        assert_eq!(
            to_csv(&[e, sw]),
            "app,kernel,block,sm,start,end,kind\n1,7,3,0,10,20,block-exec\n1,,,,10,20,context-switch\n"
        );
        let json = to_json(&[e]);
        assert!(json.contains(r#""kind":"block-exec""#));
        assert!(json.contains(r#""kernel":7"#));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(from_csv("nope\n"), Err(TraceParseError::Header));
        assert_eq!(
            from_csv(&format!("{CSV_HEADER}\n1,2,3\n")),
            Err(TraceParseError::Arity(2))
        );
        assert_eq!(
            from_csv(&format!("{CSV_HEADER}\n1,,,,9,3,copy\n")),
            Err(TraceParseError::Interval(2))
        );
    }
}
