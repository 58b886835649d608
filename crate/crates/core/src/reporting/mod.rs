//! Run-record persistence and the two summary families: per-step mean with
//! a 95% confidence band, and final-loss box statistics.

mod plots;
mod records;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::RunRecord;

pub use plots::{emit_plots, summarize, OptimizerSummary, TaskReport};
pub use records::{read_records, read_records_dir, write_records, write_timings};

/// Normal-approximation 95% quantile.
pub const Z_95: f64 = 1.96;

/// Tukey fence multiplier.
pub const WHISKER_IQR: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub mean: f64,
    /// `1.96 · s / √n` with `s` the sample standard deviation.
    pub ci_half: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStats {
    pub steps: Vec<StepStats>,
}

/// Per-step mean and 95% CI half-width over equally long traces.
pub fn convergence_from_traces(traces: &[&[f64]]) -> Result<ConvergenceStats> {
    if traces.len() < 2 {
        return Err(Error::config(format!(
            "confidence intervals need at least 2 traces, got {}",
            traces.len()
        )));
    }
    let len = traces[0].len();
    if let Some(bad) = traces.iter().find(|t| t.len() != len) {
        return Err(Error::DimensionMismatch {
            expected: len,
            found: bad.len(),
        });
    }
    let n = traces.len() as f64;
    let steps = (0..len)
        .map(|s| {
            let mean = traces.iter().map(|t| t[s]).sum::<f64>() / n;
            let var = traces.iter().map(|t| (t[s] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            StepStats {
                mean,
                ci_half: Z_95 * var.sqrt() / n.sqrt(),
                n: traces.len(),
            }
        })
        .collect();
    Ok(ConvergenceStats { steps })
}

/// [`convergence_from_traces`] over the loss traces of `records`.
pub fn convergence_stats(records: &[RunRecord]) -> Result<ConvergenceStats> {
    let traces: Vec<&[f64]> = records.iter().map(|r| r.trace.as_slice()).collect();
    convergence_from_traces(&traces)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    /// Points beyond the whiskers, ascending.
    pub outliers: Vec<f64>,
}

/// Quantile of sorted data by linear interpolation between order
/// statistics at position `(n − 1) p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median, quartiles, Tukey whiskers (the most extreme points within
/// 1.5·IQR of the box) and the remaining outliers.
pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::Empty("box statistics"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::config("box statistics of NaN values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - WHISKER_IQR * iqr, q3 + WHISKER_IQR * iqr);
    let mut inside = sorted.iter().copied().filter(|v| (lo_fence..=hi_fence).contains(v));
    let whisker_low = inside.clone().next().unwrap_or(median);
    let whisker_high = inside.next_back().unwrap_or(median);
    let outliers = sorted
        .iter()
        .copied()
        .filter(|v| *v < whisker_low || *v > whisker_high)
        .collect();
    Ok(BoxStats {
        median,
        q1,
        q3,
        whisker_low,
        whisker_high,
        outliers,
    })
}
