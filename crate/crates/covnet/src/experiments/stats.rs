//! Summaries for simulation output. Per-cycle traces are a ratio estimate
//! (total bits over total seconds), so their uncertainty comes from the
//! leave-one-out jackknife; plain i.i.d. samples get the usual moments.

use serde::Serialize;

use super::ExperimentError;
use crate::sim::estimate::ratio_with_jackknife_se;
use crate::sim::{CycleTrace, MIN_CYCLES};

/// Throughput estimate from a batch of per-cycle traces.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceSummary {
    pub n: usize,
    /// Total bits over total seconds, bit/s.
    pub mean: f64,
    pub std_err: f64,
    /// mean +- 1.96 standard errors.
    pub ci95: (f64, f64),
}

/// Summarize per-cycle traces into a throughput figure. Cycles are drawn
/// from a renewal process, so the estimator is the ratio of sums, not the
/// mean of per-cycle rates.
pub fn summarize(traces: &[CycleTrace]) -> Result<TraceSummary, ExperimentError> {
    if (traces.len() as u64) < MIN_CYCLES {
        return Err(ExperimentError::Spec(format!(
            "need at least {MIN_CYCLES} cycles to summarize, got {}",
            traces.len()
        )));
    }
    let (mean, std_err) = ratio_with_jackknife_se(traces);
    Ok(TraceSummary {
        n: traces.len(),
        mean,
        std_err,
        ci95: (mean - 1.96 * std_err, mean + 1.96 * std_err),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub std_err: f64,
    /// mean +- 1.96 standard errors.
    pub ci95: (f64, f64),
}

/// Mean and dispersion of a plain i.i.d. sample: link-rate calibrations,
/// timing measurements, anything that is not a per-cycle ratio. Requires at
/// least two values; fewer have no spread to report.
pub fn summarize_values(samples: &[f64]) -> Option<SampleSummary> {
    let n = samples.len();
    if n < 2 {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let std_dev = (ss / (n - 1) as f64).sqrt();
    let std_err = std_dev / (n as f64).sqrt();
    Some(SampleSummary {
        n,
        mean,
        std_dev,
        std_err,
        ci95: (mean - 1.96 * std_err, mean + 1.96 * std_err),
    })
}
