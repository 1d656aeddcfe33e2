//! Percentiles, pooling gains and confidence intervals.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("no samples")]
    Empty,
    #[error("baseline percentile is zero")]
    DegenerateBaseline,
    #[error("need at least two drops for a confidence interval")]
    TooFewDrops,
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Percentile of already-sorted samples, interpolating linearly between the
/// closest ranks at `h = (n−1)·p/100`.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> Result<f64, StatsError> {
    if sorted.is_empty() {
        return Err(StatsError::Empty);
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 100.0) / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn percentile(samples: &[f64], p: f64) -> Result<f64, StatsError> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile_sorted(&sorted, p)
}

/// Relative change of percentile `p`, in percent.
pub fn pooling_gain(scenario: &[f64], baseline: &[f64], p: f64) -> Result<f64, StatsError> {
    let b = percentile(baseline, p)?;
    if b <= 0.0 {
        return Err(StatsError::DegenerateBaseline);
    }
    Ok(100.0 * (percentile(scenario, p)? - b) / b)
}

/// Half-width `1.96·s/√n` of the normal-approximation 95% interval on the mean.
pub fn confidence_interval(values: &[f64]) -> Result<f64, StatsError> {
    let n = values.len();
    if n < 2 {
        return Err(StatsError::TooFewDrops);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(Z95 * var.sqrt() / (n as f64).sqrt())
}
