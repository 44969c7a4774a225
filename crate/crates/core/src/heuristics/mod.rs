//! Relax-and-fix, fix-and-optimize and the intensification phases built on
//! top of them. All subproblems are the base model plus a [`FixingLayer`].

mod budget;
mod config;
mod fo;
mod ks;
mod partition;
mod pr;
mod rf;
mod rfo;

use std::collections::BTreeSet;

use crate::backend::{MilpBackend, SolveOutcome, SolveRequest, SolveStatus};
use crate::error::Result;
use crate::instance::Instance;
use crate::model::{build_base_model, FixingLayer, MilpModel};

pub use budget::{PhaseTiming, TimeBudget};
pub use config::HeuristicConfig;
pub use fo::{build_fo_subproblem, run_fo, FoRun};
pub use ks::{build_kernel, run_ks, KernelState, KsRun, KsStep};
pub use partition::{plan_partition, PartitionScheme};
pub use pr::{
    audit_pr_layer, build_pr_problem, run_pr, run_rfo_pr, EliteSet, LayerAudit, PrExit, PrTrace,
    RfoPrRun, PR_ZERO,
};
pub use rf::{build_rf_subproblem, run_rf, RfIteration, RfRun, RfStop};
pub use rfo::{run_rfo, RfoRun};

/// An instance together with its base model.
pub struct Problem<'a> {
    pub inst: &'a Instance,
    pub model: MilpModel,
}

impl<'a> Problem<'a> {
    pub fn new(inst: &'a Instance) -> Result<Self> {
        Ok(Problem {
            inst,
            model: build_base_model(inst)?,
        })
    }
}

/// Shortcut items: stored on the instance, otherwise derived from
/// triangle violations.
pub fn shortcut_set(inst: &Instance) -> BTreeSet<usize> {
    inst.shortcut_items()
}

/// The shortcut set used by a run, empty for the starred variants.
pub fn psi_for(inst: &Instance, cfg: &HeuristicConfig) -> BTreeSet<usize> {
    if cfg.psi_empty {
        BTreeSet::new()
    } else {
        shortcut_set(inst)
    }
}

fn solve_layer(
    backend: &mut dyn MilpBackend,
    model: &MilpModel,
    layer: &FixingLayer,
    limit: f64,
    warm: Option<&[f64]>,
) -> SolveOutcome {
    if limit < budget::MIN_SOLVE_TIME {
        return SolveOutcome::failed(
            SolveStatus::NoSolutionLimit,
            0.0,
            Some("no time left".into()),
        );
    }
    let mut req = SolveRequest::new(model, limit).with_layer(layer);
    req.warm_start = warm;
    backend.solve(&req)
}

#[cfg(test)]
pub(crate) mod testkit {
    use crate::backend::HighsBackend;
    use crate::instance::Instance;

    use super::HeuristicConfig;

    /// A small feasible instance with varied data.
    pub fn small(n: usize, m: usize, p: usize) -> Instance {
        let mut inst = Instance::blank(n, m, p);
        for i in 0..n {
            inst.holding[i] = 1.0 + i as f64;
            for t in 0..p {
                inst.demand[i][t] = 10.0 + ((i * 7 + t * 3) % 9) as f64;
            }
        }
        for k in 0..m {
            for t in 0..p {
                let total: f64 = (0..n).map(|i| inst.demand[i][t]).sum();
                inst.capacity[k][t] = 1.2 * total / m as f64 + 15.0;
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let b = 3.0 + ((i + 2 * j + k) % 5) as f64;
                        inst.setup_time[k][i][j] = b;
                        inst.setup_cost[k][i][j] = 20.0 * b;
                    }
                }
            }
        }
        inst
    }

    /// One item, zero costs, demand 10 against capacity 100.
    pub fn zero_toy() -> Instance {
        let mut inst = Instance::blank(1, 1, 1);
        inst.demand[0][0] = 10.0;
        inst.capacity[0][0] = 100.0;
        inst
    }

    pub fn cfg(limit: f64) -> HeuristicConfig {
        HeuristicConfig {
            time_limit_rf: limit,
            time_limit_fo: limit,
            time_limit_pr: limit,
            time_limit_ks: limit,
            ..HeuristicConfig::default()
        }
    }

    pub fn highs() -> HighsBackend {
        HighsBackend::new()
    }
}
