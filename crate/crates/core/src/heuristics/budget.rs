use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::backend::TIME_GRACE;

/// Below this many seconds a subproblem is not worth dispatching.
pub(crate) const MIN_SOLVE_TIME: f64 = 1e-3;

/// Wall-clock budget measured from construction.
#[derive(Debug, Clone)]
pub struct TimeBudget {
    limit: f64,
    start: Instant,
}

impl TimeBudget {
    pub fn new(limit: f64) -> Self {
        TimeBudget {
            limit: limit.max(0.0),
            start: Instant::now(),
        }
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn remaining(&self) -> f64 {
        (self.limit - self.elapsed()).max(0.0)
    }

    pub fn exhausted(&self) -> bool {
        self.remaining() < MIN_SOLVE_TIME
    }

    /// Per-subproblem share when `parts` solves remain.
    pub fn share(&self, parts: usize) -> f64 {
        self.remaining() / parts.max(1) as f64
    }

    pub fn timing(&self, phase: &str) -> PhaseTiming {
        PhaseTiming {
            phase: phase.to_string(),
            limit: self.limit,
            elapsed: self.elapsed(),
        }
    }
}

/// Measured time of one heuristic phase against its configured limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub limit: f64,
    pub elapsed: f64,
}

impl PhaseTiming {
    pub fn within_grace(&self) -> bool {
        self.elapsed <= self.limit * (1.0 + TIME_GRACE)
    }

    pub fn spare(&self) -> f64 {
        (self.limit - self.elapsed).max(0.0)
    }
}
