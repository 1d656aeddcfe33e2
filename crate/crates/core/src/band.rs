//! Spectrum band plans for the three pooling regimes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::PoolingMode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BandPlanError {
    #[error("partial pooling needs an even number of operators, got {0}")]
    Unsupported(usize),
    #[error("total bandwidth {total_mhz} MHz cannot be split evenly across {n_operators} operators")]
    NotDivisible { total_mhz: u32, n_operators: usize },
    #[error("band plan needs at least one operator")]
    NoOperators,
}

/// Half-open frequency interval `[lo, hi)` in MHz, relative to the pool start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo_mhz: u32,
    pub hi_mhz: u32,
}

impl Interval {
    pub fn new(lo_mhz: u32, hi_mhz: u32) -> Self {
        Interval { lo_mhz, hi_mhz }
    }

    pub fn width_mhz(&self) -> u32 {
        self.hi_mhz.saturating_sub(self.lo_mhz)
    }

    pub fn is_empty(&self) -> bool {
        self.width_mhz() == 0
    }
}

/// True iff the two intervals intersect with positive measure.
pub fn bands_overlap(a: Interval, b: Interval) -> bool {
    a.lo_mhz.max(b.lo_mhz) < a.hi_mhz.min(b.hi_mhz)
}

/// One frequency interval per operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandPlan {
    pub total_mhz: u32,
    allocations: Vec<Interval>,
}

impl BandPlan {
    pub fn n_operators(&self) -> usize {
        self.allocations.len()
    }

    pub fn allocation(&self, operator: usize) -> Interval {
        self.allocations[operator]
    }

    pub fn allocations(&self) -> &[Interval] {
        &self.allocations
    }

    pub fn bandwidth_hz(&self, operator: usize) -> f64 {
        f64::from(self.allocations[operator].width_mhz()) * 1e6
    }

    pub fn overlaps(&self, op_a: usize, op_b: usize) -> bool {
        bands_overlap(self.allocations[op_a], self.allocations[op_b])
    }

    /// Row-major `n × n` table of [`BandPlan::overlaps`].
    pub fn overlap_matrix(&self) -> Vec<bool> {
        let n = self.n_operators();
        (0..n * n).map(|k| self.overlaps(k / n, k % n)).collect()
    }
}

/// Builds the band plan of a pooling regime.
///
/// * Exclusive: operator `i` gets `[i·B/n, (i+1)·B/n)`.
/// * Partial: the first half of the operators share `[0, B/2)`, the second
///   half `[B/2, B)`.
/// * Full: every operator gets `[0, B)`.
pub fn band_plan(mode: PoolingMode, total_mhz: u32, n_operators: usize) -> Result<BandPlan, BandPlanError> {
    if n_operators == 0 {
        return Err(BandPlanError::NoOperators);
    }
    let n = n_operators as u32;
    if total_mhz == 0 || total_mhz % n != 0 {
        return Err(BandPlanError::NotDivisible { total_mhz, n_operators });
    }
    let allocations = match mode {
        PoolingMode::Exclusive => {
            let share = total_mhz / n;
            (0..n).map(|i| Interval::new(i * share, (i + 1) * share)).collect()
        }
        PoolingMode::Partial => {
            if n_operators % 2 != 0 {
                return Err(BandPlanError::Unsupported(n_operators));
            }
            let half = total_mhz / 2;
            (0..n_operators)
                .map(|i| {
                    if i < n_operators / 2 {
                        Interval::new(0, half)
                    } else {
                        Interval::new(half, total_mhz)
                    }
                })
                .collect()
        }
        PoolingMode::Full => vec![Interval::new(0, total_mhz); n_operators],
    };
    Ok(BandPlan { total_mhz, allocations })
}
