use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{run_fo, solve_layer, HeuristicConfig, PhaseTiming, Problem, RfoRun, TimeBudget};
use crate::backend::MilpBackend;
use crate::error::Result;
use crate::model::{FixingLayer, MilpModel, VarKey};
use crate::solution::Solution;
use crate::TOL;

/// Elite values at or below this count as zero.
pub const PR_ZERO: f64 = 1e-3;

/// RF snapshot, best RF/PR solution and best FO solution.
#[derive(Debug, Clone)]
pub struct EliteSet {
    pub e1: Solution,
    pub e2: Solution,
    pub e3: Solution,
}

impl EliteSet {
    pub fn from_rfo(rfo: &RfoRun) -> Option<Self> {
        let e2 = rfo.rf_best()?.clone();
        let e3 = rfo.fo_best()?.clone();
        let e1 = rfo.snapshot().cloned().unwrap_or_else(|| e2.clone());
        Some(EliteSet { e1, e2, e3 })
    }

    pub fn z2(&self) -> f64 {
        self.e2.objective
    }

    pub fn z3(&self) -> f64 {
        self.e3.objective
    }

    pub fn converged(&self) -> bool {
        (self.z2() - self.z3()).abs() <= TOL
    }

    /// The better of `e2` and `e3`.
    pub fn best(&self) -> &Solution {
        if self.z2() < self.z3() {
            &self.e2
        } else {
            &self.e3
        }
    }

    fn all_zero(&self, i: usize, j: usize, k: usize, t: usize) -> bool {
        [&self.e1, &self.e2, &self.e3]
            .iter()
            .all(|s| s.y_at(i, j, k, t) <= PR_ZERO)
    }
}

/// Fixes to zero every `y` with both items outside `psi`, a period before
/// `zeta` (one-based) and a zero value in all three elite solutions.
pub fn build_pr_problem(
    model: &MilpModel,
    elite: &EliteSet,
    psi: &BTreeSet<usize>,
    zeta: usize,
) -> FixingLayer {
    let mut layer = FixingLayer::new();
    for (id, (i, j, k, t)) in model.y_vars() {
        if !psi.contains(&i) && !psi.contains(&j) && t + 1 < zeta && elite.all_zero(i, j, k, t) {
            layer.fix(id, 0.0);
        }
    }
    layer
}

/// Re-scan of a PR layer against the fixing rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerAudit {
    pub fixed: usize,
    /// Fixings touching a shortcut item, a period at or after `zeta`, a
    /// non-`y` variable, a nonzero value or a nonzero elite entry.
    pub offending: usize,
}

pub fn audit_pr_layer(
    model: &MilpModel,
    layer: &FixingLayer,
    elite: &EliteSet,
    psi: &BTreeSet<usize>,
    zeta: usize,
) -> LayerAudit {
    let offending = layer
        .fixed
        .iter()
        .filter(|&(&id, &value)| match model.var(id).key {
            VarKey::Y { i, j, k, t } => {
                psi.contains(&i)
                    || psi.contains(&j)
                    || t + 1 >= zeta
                    || value != 0.0
                    || !elite.all_zero(i, j, k, t)
            }
            _ => true,
        })
        .count();
    LayerAudit {
        fixed: layer.fixed.len(),
        offending,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrExit {
    /// `Z2 = Z3`.
    Converged,
    TimeLimit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrTrace {
    /// `Z2` on entry and after every solve.
    pub z2: Vec<f64>,
    pub z3: f64,
    pub solves: usize,
    pub exit: PrExit,
    pub audits: Vec<LayerAudit>,
    pub timing: PhaseTiming,
}

/// Solves the restricted model until `Z2 = Z3` or the time is up, halving
/// the remaining time for each solve and replacing `e2` on strict
/// improvement.
pub fn run_pr(
    problem: &Problem<'_>,
    mut elite: EliteSet,
    psi: &BTreeSet<usize>,
    zeta: usize,
    limit: f64,
    backend: &mut dyn MilpBackend,
) -> Result<(EliteSet, PrTrace)> {
    let model = &problem.model;
    let budget = TimeBudget::new(limit);
    let mut z2 = vec![elite.z2()];
    let mut audits = Vec::new();
    let mut solves = 0;
    let mut mip_limit = limit / 2.0;
    let exit = loop {
        if elite.converged() {
            break PrExit::Converged;
        }
        if budget.exhausted() {
            break PrExit::TimeLimit;
        }
        let layer = build_pr_problem(model, &elite, psi, zeta);
        audits.push(audit_pr_layer(model, &layer, &elite, psi, zeta));
        let warm = elite.best().to_primal(model);
        let out = solve_layer(
            backend,
            model,
            &layer,
            mip_limit.min(budget.remaining()),
            Some(&warm),
        );
        solves += 1;
        if let Some(sol) = out.solution(model) {
            if sol.objective < elite.z2() - TOL {
                elite.e2 = sol;
            }
        }
        z2.push(elite.z2());
        mip_limit = budget.remaining() / 2.0;
    };
    let trace = PrTrace {
        z2,
        z3: elite.z3(),
        solves,
        exit,
        audits,
        timing: budget.timing("pr"),
    };
    Ok((elite, trace))
}

#[derive(Debug, Clone)]
pub struct RfoPrRun {
    /// Better of `e2` and `e3`; `None` when RFO found nothing feasible.
    pub best: Option<Solution>,
    pub elite: Option<EliteSet>,
    pub traces: Vec<PrTrace>,
    pub fo_runs: usize,
    pub timing: PhaseTiming,
}

/// Alternates PR and FO from RFO's output. Budget: the PR limit plus RFO's
/// unused time.
pub fn run_rfo_pr(
    problem: &Problem<'_>,
    rfo: &RfoRun,
    cfg: &HeuristicConfig,
    psi: &BTreeSet<usize>,
    backend: &mut dyn MilpBackend,
) -> Result<RfoPrRun> {
    let budget = TimeBudget::new(cfg.time_limit_pr + rfo.spare());
    let zeta = cfg.zeta_for(problem.model.p);
    let Some(mut elite) = EliteSet::from_rfo(rfo) else {
        return Ok(RfoPrRun {
            best: None,
            elite: None,
            traces: Vec::new(),
            fo_runs: 0,
            timing: budget.timing("pr"),
        });
    };
    let mut traces = Vec::new();
    let mut fo_runs = 0;
    while !budget.exhausted() && !elite.converged() {
        let z_pr = elite.z2();
        let (next, trace) = run_pr(problem, elite, psi, zeta, budget.remaining(), backend)?;
        elite = next;
        let stalled = trace.solves == 0;
        traces.push(trace);
        if !budget.exhausted() && z_pr > elite.z2() + TOL && !elite.converged() {
            let fo = run_fo(problem, &elite.e2, cfg, budget.remaining(), backend)?;
            fo_runs += 1;
            // Keep e3 unless FO beats it, so the result never falls behind RFO.
            if fo.best.objective < elite.z3() - TOL {
                elite.e3 = fo.best;
            }
        } else if stalled {
            break;
        }
    }
    Ok(RfoPrRun {
        best: Some(elite.best().clone()),
        elite: Some(elite),
        traces,
        fo_runs,
        timing: budget.timing("pr"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::{run_rfo, testkit};
    use crate::model::build_base_model;

    fn elite_from(sol: &Solution) -> EliteSet {
        let mut s = sol.clone();
        s.feasible = true;
        EliteSet {
            e1: s.clone(),
            e2: s.clone(),
            e3: s,
        }
    }

    #[test]
    fn layer_edge_cases() {
        let inst = testkit::small(3, 1, 3);
        let model = build_base_model(&inst).unwrap();
        let elite = elite_from(&Solution::for_instance(&inst));
        let all: BTreeSet<usize> = (0..3).collect();
        assert!(build_pr_problem(&model, &elite, &all, 3).is_empty());
        assert!(build_pr_problem(&model, &elite, &BTreeSet::new(), 1).is_empty());
    }

    #[test]
    fn identical_elite_fixes_zero_support() {
        let inst = testkit::small(3, 1, 3);
        let model = build_base_model(&inst).unwrap();
        let mut sol = Solution::for_instance(&inst);
        let idx = sol.ijkt(0, 2, 0, 0);
        sol.y[idx] = 1.0;
        let elite = elite_from(&sol);
        let psi: BTreeSet<usize> = [1].into();
        let layer = build_pr_problem(&model, &elite, &psi, 3);
        let mut expected = 0;
        for i in 0..3 {
            for j in 0..3 {
                for t in 0..3 {
                    if i != 1 && j != 1 && t + 1 < 3 && sol.y_at(i, j, 0, t) == 0.0 {
                        expected += 1;
                    }
                }
            }
        }
        assert_eq!(layer.fixed.len(), expected);
        let audit = audit_pr_layer(&model, &layer, &elite, &psi, 3);
        assert_eq!(audit.offending, 0);
    }

    #[test]
    fn converged_elite_returns_without_solving() {
        let inst = testkit::zero_toy();
        let problem = Problem::new(&inst).unwrap();
        let rfo = run_rfo(&problem, &testkit::cfg(5.0), &mut testkit::highs()).unwrap();
        let elite = EliteSet::from_rfo(&rfo).unwrap();
        let (elite, trace) = run_pr(
            &problem,
            elite,
            &BTreeSet::new(),
            1,
            5.0,
            &mut testkit::highs(),
        )
        .unwrap();
        assert_eq!(trace.solves, 0);
        assert_eq!(trace.exit, PrExit::Converged);
        assert!(elite.z2().abs() < 1e-9);
    }

    #[test]
    fn composite_not_worse_than_rfo() {
        let inst = testkit::small(3, 2, 5);
        let problem = Problem::new(&inst).unwrap();
        let cfg = testkit::cfg(10.0);
        let mut backend = testkit::highs();
        let rfo = run_rfo(&problem, &cfg, &mut backend).unwrap();
        let run = run_rfo_pr(&problem, &rfo, &cfg, &BTreeSet::new(), &mut backend).unwrap();
        let best = run.best.unwrap();
        assert!(best.objective <= rfo.fo_best().unwrap().objective + 1e-9);
        for tr in &run.traces {
            assert!(tr.z2.windows(2).all(|w| w[1] <= w[0]));
            assert!(tr.audits.iter().all(|a| a.offending == 0));
        }
    }
}
