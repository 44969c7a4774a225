use serde::{Deserialize, Serialize};

use super::{solve_layer, HeuristicConfig, PartitionScheme, PhaseTiming, Problem, TimeBudget};
use crate::backend::{MilpBackend, SolveStatus};
use crate::error::{Error, Result};
use crate::model::{FixingLayer, MilpModel, VarId, VarKey};
use crate::solution::Solution;

/// RF layer at iteration `v`: `z` relaxed, `y` fixed before the window,
/// integer inside it and relaxed after it.
pub fn build_rf_subproblem(
    model: &MilpModel,
    scheme: &PartitionScheme,
    v: usize,
    prev: Option<&Solution>,
) -> Result<FixingLayer> {
    if v == 0 || v > scheme.theta {
        return Err(Error::InvalidArgument(format!(
            "iteration {v} outside 1..={}",
            scheme.theta
        )));
    }
    if v > 1 && prev.is_none() {
        return Err(Error::InvalidArgument(format!(
            "iteration {v} needs the previous solution"
        )));
    }
    let start = scheme.rf_start(v);
    let (_, end) = scheme.interval(v);
    let mut layer = FixingLayer::new();
    for (idx, var) in model.vars.iter().enumerate() {
        let id = VarId(idx);
        match var.key {
            VarKey::Z { .. } | VarKey::ZEnd { .. } => layer.relax(id, var.lower, var.upper),
            VarKey::Y { i, j, k, t } => {
                let period = t + 1;
                if period < start {
                    let value = prev.expect("checked above").y_at(i, j, k, t).round();
                    layer.fix(id, value.clamp(var.lower, var.upper));
                } else if period <= end {
                    layer.force_integer(id);
                } else {
                    layer.relax(id, var.lower, var.upper);
                }
            }
            _ => {}
        }
    }
    Ok(layer)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfIteration {
    pub v: usize,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RfStop {
    Completed,
    Infeasible { v: usize },
    NoSolution { v: usize },
}

#[derive(Debug, Clone)]
pub struct RfRun {
    pub scheme: PartitionScheme,
    /// Solution of iteration `max(1, theta - 3)`, or the earliest one when
    /// the run stops before it. Partially relaxed, hence not flagged feasible.
    pub snapshot: Option<Solution>,
    pub snapshot_iteration: Option<usize>,
    /// Final integer solution.
    pub best: Option<Solution>,
    pub iterations: Vec<RfIteration>,
    /// Set when the last iteration had to be repeated with binary `z`.
    pub z_repair: bool,
    pub stop: RfStop,
    pub timing: PhaseTiming,
}

pub fn run_rf(
    problem: &Problem<'_>,
    cfg: &HeuristicConfig,
    backend: &mut dyn MilpBackend,
) -> Result<RfRun> {
    let model = &problem.model;
    let budget = TimeBudget::new(cfg.time_limit_rf);
    let scheme = PartitionScheme::for_heuristic(model.p, cfg.lambda_rf, cfg.gamma_rf)?;
    let theta = scheme.theta;
    let per_mip = cfg.time_limit_rf / theta as f64;
    let target = theta.saturating_sub(3).max(1);

    let mut iterations = Vec::with_capacity(theta);
    let mut snapshot: Option<(usize, Solution)> = None;
    let mut earliest: Option<Solution> = None;
    let mut prev: Option<Solution> = None;
    let mut before_last: Option<Solution> = None;
    let mut stop = RfStop::Completed;

    for v in 1..=theta {
        let layer = build_rf_subproblem(model, &scheme, v, prev.as_ref())?;
        let out = solve_layer(
            backend,
            model,
            &layer,
            per_mip.min(budget.remaining()),
            None,
        );
        let sol = out.solution(model);
        iterations.push(RfIteration {
            v,
            status: out.status,
            objective: sol.as_ref().map(|s| s.objective),
            wall_time: out.wall_time,
        });
        let Some(mut sol) = sol else {
            stop = if out.status == SolveStatus::Infeasible {
                RfStop::Infeasible { v }
            } else {
                RfStop::NoSolution { v }
            };
            break;
        };
        sol.feasible = false;
        if v == target {
            snapshot = Some((v, sol.clone()));
        }
        if earliest.is_none() {
            earliest = Some(sol.clone());
        }
        before_last = prev.replace(sol);
    }

    let mut z_repair = false;
    let mut best = None;
    if stop == RfStop::Completed {
        let last = prev.take().expect("completed run has a solution");
        if last.is_integral(model) {
            best = Some(last);
        } else {
            // Integer y with fractional z: repeat the last window with binary z.
            z_repair = true;
            let mut layer = build_rf_subproblem(model, &scheme, theta, before_last.as_ref())?;
            for (idx, var) in model.vars.iter().enumerate() {
                if matches!(var.key, VarKey::Z { .. } | VarKey::ZEnd { .. }) {
                    layer.domain_override.remove(&VarId(idx));
                }
            }
            let limit = budget.remaining().max(0.1 * per_mip);
            let out = solve_layer(backend, model, &layer, limit, None);
            let sol = out.solution(model);
            iterations.push(RfIteration {
                v: theta,
                status: out.status,
                objective: sol.as_ref().map(|s| s.objective),
                wall_time: out.wall_time,
            });
            match sol {
                Some(sol) => best = Some(sol),
                None if out.status == SolveStatus::Infeasible => {
                    stop = RfStop::Infeasible { v: theta }
                }
                None => stop = RfStop::NoSolution { v: theta },
            }
        }
    }
    if let Some(b) = best.as_mut() {
        b.feasible = true;
    }
    let (snapshot_iteration, snapshot) = match snapshot {
        Some((v, s)) => (Some(v), Some(s)),
        None => (earliest.as_ref().map(|_| 1), earliest),
    };
    Ok(RfRun {
        scheme,
        snapshot,
        snapshot_iteration,
        best,
        iterations,
        z_repair,
        stop,
        timing: budget.timing("rf"),
    })
}
