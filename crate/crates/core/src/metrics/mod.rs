//! Post-processing of runs: NET, IPS, overlap, order checks and reports.

pub mod order;
pub mod overlap;
pub mod stats;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{AppOutcome, OpClass, OpRecord, TraceEvent, TraceFormat};
use crate::runtime::{AppId, KernelId, OpId};
use crate::workloads::{RunConfig, RunResult, Window};

pub use order::{check_barriers, check_order, Violation};
pub use overlap::{blocks_exclusive, op_spans, overlap_fraction, span_overlap, Span};
pub use stats::{compute_ips, compute_net, percentile, summarize, DistSummary};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty sample group")]
    EmptyGroup,
    #[error("execution time of zero cycles")]
    ZeroExecTime,
    #[error("interval duration must be positive")]
    ZeroInterval,
    #[error("no trace events in the measured period")]
    EmptyTrace,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Observed execution time of one kernel call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSample {
    pub kernel: KernelId,
    pub app: AppId,
    pub op: OpId,
    pub et: u64,
}

/// Completed kernel executions that started inside the window (or all of
/// them for a run measured whole).
pub fn kernel_samples(ops: &[OpRecord], window: Option<Window>) -> Vec<KernelSample> {
    ops.iter()
        .filter(|o| o.class == OpClass::Execute)
        .filter_map(|o| {
            let (start, end) = o.span()?;
            if window.is_some_and(|w| !w.contains(start)) {
                return None;
            }
            Some(KernelSample {
                kernel: o.func?,
                app: o.app,
                op: o.id,
                et: end - start,
            })
        })
        .collect()
}

/// NET of every sample, grouped by kernel identity.
pub fn net_by_kernel(
    samples: &[KernelSample],
) -> Result<BTreeMap<KernelId, Vec<f64>>, MetricsError> {
    let mut groups: BTreeMap<KernelId, Vec<u64>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.kernel).or_default().push(s.et);
    }
    groups
        .into_iter()
        .map(|(k, ets)| Ok((k, compute_net(&ets)?)))
        .collect()
}

pub fn fraction_above(values: &[f64], threshold: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v > threshold).count() as f64 / values.len() as f64
}

/// Completions falling in each interval of the window.
pub fn interval_counts(completions: &[u64], window: Window) -> Vec<u64> {
    let mut counts = vec![0u64; window.intervals as usize];
    for &t in completions.iter().filter(|&&t| window.contains(t)) {
        counts[((t - window.start) / window.interval) as usize] += 1;
    }
    counts
}

/// IPS of each application, in inferences per interval. A run measured
/// whole counts every inference over the application's lifetime.
pub fn per_app_ips(
    apps: &[AppOutcome],
    window: Option<Window>,
    interval_cycles: u64,
    end_time: u64,
) -> Result<Vec<f64>, MetricsError> {
    apps.iter()
        .map(|a| match window {
            Some(w) => compute_ips(&interval_counts(&a.inferences, w), 1.0),
            None => {
                let span = a.finished_at.unwrap_or(end_time) as f64 / interval_cycles as f64;
                compute_ips(&[a.inferences.len() as u64], span)
            }
        })
        .collect()
}

/// Metrics of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub label: String,
    pub config: RunConfig,
    /// Command-line flags that produced the run, when run from the CLI.
    pub flags: Vec<String>,
    pub makespan: Option<u64>,
    pub end_time: u64,
    pub context_switches: u64,
    pub kernel_samples: usize,
    pub net_summary: Option<DistSummary>,
    pub net_above_2: f64,
    pub ips: f64,
    pub per_app_ips: Vec<f64>,
    pub overlap_fraction: f64,
    pub order_violations: usize,
    pub barrier_violations: usize,
}

pub fn build_report(run: &RunResult, flags: &[String]) -> Result<Report, MetricsError> {
    let out = &run.output;
    let samples = kernel_samples(&out.ops, run.window);
    let net: Vec<f64> = net_by_kernel(&samples)?.into_values().flatten().collect();
    let per_app = per_app_ips(
        &out.apps,
        run.window,
        run.config.interval_cycles,
        out.end_time,
    )?;
    let ips = per_app.iter().sum::<f64>() / per_app.len().max(1) as f64;
    let trace: Vec<TraceEvent> = match run.window {
        Some(w) => out
            .trace
            .iter()
            .copied()
            .filter(|e| e.end > w.start)
            .collect(),
        None => out.trace.clone(),
    };
    Ok(Report {
        label: run.config.label(),
        config: run.config.clone(),
        flags: flags.to_vec(),
        makespan: out.makespan(),
        end_time: out.end_time,
        context_switches: out.context_switches,
        kernel_samples: samples.len(),
        net_summary: summarize(&net).ok(),
        net_above_2: fraction_above(&net, 2.0),
        ips,
        per_app_ips: per_app,
        overlap_fraction: overlap_fraction(&trace),
        order_violations: check_order(&out.ops).len(),
        barrier_violations: check_barriers(&out.ops, &out.calls).len(),
    })
}

/// Writes the chronogram of the measured period, one row per event.
pub fn export_chronogram(
    trace: &[TraceEvent],
    window: Option<Window>,
    path: &Path,
    format: TraceFormat,
) -> Result<(), MetricsError> {
    let kept: Vec<TraceEvent> = trace
        .iter()
        .copied()
        .filter(|e| window.is_none_or(|w| e.end > w.start))
        .collect();
    if kept.is_empty() {
        return Err(MetricsError::EmptyTrace);
    }
    fs::write(path, format.render(&kept))?;
    Ok(())
}

/// gnuplot script drawing a chronogram CSV: one column per application,
/// one segment per block.
pub fn gnuplot_script(csv_name: &str, apps: u32) -> String {
    format!(
        "set datafile separator ','\n\
         set key off\n\
         set xlabel 'application'\n\
         set ylabel 'cycle'\n\
         set xrange [-0.5:{hi}]\n\
         plot '{csv_name}' every ::1 using ($1 + ($4 / 10.0) - 0.4):5:(0):($6 - $5) \
         with vectors nohead lw 2\n",
        hi = f64::from(apps) - 0.5,
    )
}
