//! NET, IPS and distribution summaries.

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Normalized execution time of each sample: its execution time divided by
/// the smallest one in the group.
pub fn compute_net(group: &[u64]) -> Result<Vec<f64>, MetricsError> {
    let min = *group.iter().min().ok_or(MetricsError::EmptyGroup)?;
    if min == 0 {
        return Err(MetricsError::ZeroExecTime);
    }
    Ok(group.iter().map(|&et| et as f64 / min as f64).collect())
}

/// Mean of the per-interval completion rates. `interval` is the length of
/// one interval in the unit IPS is reported in.
pub fn compute_ips(counts: &[u64], interval: f64) -> Result<f64, MetricsError> {
    if interval.is_nan() || interval <= 0.0 {
        return Err(MetricsError::ZeroInterval);
    }
    if counts.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    let rates: f64 = counts.iter().map(|&c| c as f64 / interval).sum();
    Ok(rates / counts.len() as f64)
}

/// Nearest-rank percentile: the value at rank `ceil(p/100 * n)` of the
/// sorted sample (rank 1 for p = 0).
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Boxplot summary: the box spans the middle 50%, whiskers cover 99% of the
/// samples and the 0.5% tails on each side are left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistSummary {
    pub count: usize,
    pub median: f64,
    pub box_lo: f64,
    pub box_hi: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(values: &[f64]) -> Result<DistSummary, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(DistSummary {
        count: v.len(),
        median: percentile(&v, 50.0),
        box_lo: percentile(&v, 25.0),
        box_hi: percentile(&v, 75.0),
        whisker_lo: percentile(&v, 0.5),
        whisker_hi: percentile(&v, 99.5),
        min: v[0],
        max: v[v.len() - 1],
    })
}
