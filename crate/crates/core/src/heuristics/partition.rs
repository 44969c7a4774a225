use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Overlapping period windows shared by RF and FO. Periods are one-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionScheme {
    pub lambda: usize,
    pub gamma: usize,
    pub theta: usize,
    pub intervals: Vec<(usize, usize)>,
}

/// Requires `1 <= gamma < lambda <= p`.
pub fn plan_partition(p: usize, lambda: usize, gamma: usize) -> Result<PartitionScheme> {
    if gamma == 0 || gamma >= lambda {
        return Err(Error::InvalidPartition(format!(
            "overlap {gamma} must satisfy 1 <= gamma < lambda = {lambda}"
        )));
    }
    if lambda > p {
        return Err(Error::InvalidPartition(format!(
            "window {lambda} exceeds horizon {p}"
        )));
    }
    let theta = (p - lambda).div_ceil(lambda - gamma) + 1;
    let mut intervals = Vec::with_capacity(theta);
    if theta == 1 {
        intervals.push((1, p));
    } else {
        intervals.push((1, lambda));
        for _ in 2..theta {
            let prev_end = intervals.last().unwrap().1;
            let start = prev_end - gamma + 1;
            intervals.push((start, start + lambda - 1));
        }
        intervals.push((p - gamma + 1, p));
    }
    Ok(PartitionScheme {
        lambda,
        gamma,
        theta,
        intervals,
    })
}

impl PartitionScheme {
    /// Partition used by a heuristic: a window covering the whole horizon
    /// collapses to the single interval `[1, p]`.
    pub fn for_heuristic(p: usize, lambda: usize, gamma: usize) -> Result<Self> {
        if lambda >= p {
            return Ok(PartitionScheme {
                lambda: p,
                gamma: gamma.min(p.saturating_sub(1)),
                theta: 1,
                intervals: vec![(1, p)],
            });
        }
        plan_partition(p, lambda, gamma)
    }

    /// One-based interval of iteration `v` (one-based).
    pub fn interval(&self, v: usize) -> (usize, usize) {
        self.intervals[v - 1]
    }

    /// First period left free at RF iteration `v`. Periods skipped between
    /// the previous window end and `t'_v` join the current window so that
    /// nothing relaxed is ever fixed.
    pub fn rf_start(&self, v: usize) -> usize {
        let (start, _) = self.interval(v);
        if v == 1 {
            start
        } else {
            start.min(self.interval(v - 1).1 + 1)
        }
    }
}
