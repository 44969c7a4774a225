use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{solve_layer, PhaseTiming, Problem, TimeBudget};
use crate::backend::{MilpBackend, SolveOutcome, SolveStatus};
use crate::error::{Error, Result};
use crate::model::{Family, FixingLayer, LinearConstraint, MilpModel, Sense, VarId};
use crate::solution::Solution;

/// Reduced costs up to this value count as non-positive.
const RC_TOL: f64 = 1e-9;
/// LP values above this count as positive.
const LP_POSITIVE: f64 = 1e-9;
const AT_LEAST_ONE: f64 = 1.0 - 1e-6;

/// Kernel `K`, the ordered complement and its buckets. All ids are `y`
/// variables.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelState {
    pub kernel: BTreeSet<VarId>,
    /// Complement sorted by LP value, ties by `(i, j, k, t)`.
    pub kbar: Vec<VarId>,
    pub nb: usize,
    /// Un-promoted members of each bucket.
    pub buckets: Vec<Vec<VarId>>,
    pub incumbent: f64,
}

impl KernelState {
    pub fn bucket_capacity(&self) -> usize {
        if self.nb == 0 {
            0
        } else {
            self.kbar.len().div_ceil(self.nb)
        }
    }
}

pub fn build_kernel(
    model: &MilpModel,
    lp: &SolveOutcome,
    rf_best: &Solution,
    fo_best: &Solution,
    psi: &BTreeSet<usize>,
) -> Result<KernelState> {
    let rc = lp.reduced_costs.as_ref().ok_or_else(|| {
        Error::InvalidArgument("kernel construction needs LP reduced costs".into())
    })?;
    if !lp.has_solution() {
        return Err(Error::InvalidArgument(format!(
            "kernel construction needs an LP solution, status {:?}",
            lp.status
        )));
    }
    let mut kernel = BTreeSet::new();
    let mut rest = Vec::new();
    for (id, (i, j, k, t)) in model.y_vars() {
        let in_kernel = psi.contains(&i)
            || psi.contains(&j)
            || rc[id.0] <= RC_TOL
            || lp.values[id.0] > LP_POSITIVE
            || rf_best.y_at(i, j, k, t) >= AT_LEAST_ONE
            || fo_best.y_at(i, j, k, t) >= AT_LEAST_ONE;
        if in_kernel {
            kernel.insert(id);
        } else {
            rest.push((lp.values[id.0], (i, j, k, t), id));
        }
    }
    if kernel.is_empty() {
        return Err(Error::EmptyKernel(format!(
            "no y variable qualifies ({} candidates, |psi| = {})",
            rest.len(),
            psi.len()
        )));
    }
    rest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let kbar: Vec<VarId> = rest.into_iter().map(|r| r.2).collect();
    let nb = kbar.len().div_ceil(kernel.len());
    let mut buckets: Vec<Vec<VarId>> = if nb == 0 {
        Vec::new()
    } else {
        kbar.chunks(kbar.len().div_ceil(nb))
            .map(<[VarId]>::to_vec)
            .collect()
    };
    buckets.resize(nb, Vec::new());
    Ok(KernelState {
        kernel,
        kbar,
        nb,
        buckets,
        incumbent: fo_best.objective,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsStep {
    pub v: usize,
    pub bucket_len: usize,
    pub status: Option<SolveStatus>,
    pub accepted: bool,
    pub objective: Option<f64>,
    /// Bucket variables at value >= 1 in the accepted solution.
    pub bucket_hits: usize,
    pub kernel_size: usize,
}

#[derive(Debug, Clone)]
pub struct KsRun {
    pub best: Solution,
    pub initial: KernelState,
    pub state: KernelState,
    pub m2_status: SolveStatus,
    pub steps: Vec<KsStep>,
    pub timing: PhaseTiming,
}

/// Kernel search from RFO's solutions within `limit` seconds.
pub fn run_ks(
    problem: &Problem<'_>,
    rf_best: &Solution,
    fo_best: &Solution,
    psi: &BTreeSet<usize>,
    limit: f64,
    backend: &mut dyn MilpBackend,
) -> Result<KsRun> {
    if !fo_best.feasible {
        return Err(Error::InvalidArgument(
            "kernel search needs a feasible start".into(),
        ));
    }
    let model = &problem.model;
    let budget = TimeBudget::new(limit);
    let mut best = fo_best.clone();

    let lp = backend.solve_lp_relaxation(model, None, budget.remaining());
    let mut state = build_kernel(model, &lp, rf_best, fo_best, psi)?;
    let initial = state.clone();

    let mut m2 = FixingLayer::new();
    for &id in &state.kbar {
        m2.fix(id, 0.0);
    }
    m2.push(model.objective_cap(state.incumbent));
    let warm = best.to_primal(model);
    let out = solve_layer(backend, model, &m2, budget.remaining() / 3.0, Some(&warm));
    if let Some(sol) = out.solution(model) {
        if sol.objective <= state.incumbent {
            state.incumbent = sol.objective;
            best = sol;
        }
    }
    let m2_status = out.status;

    let mut steps = Vec::with_capacity(state.nb);
    for v in 1..=state.nb {
        let limit_v = budget.share(state.nb - v + 1);
        let bucket = state.buckets[v - 1].clone();
        let mut step = KsStep {
            v,
            bucket_len: bucket.len(),
            status: None,
            accepted: false,
            objective: None,
            bucket_hits: 0,
            kernel_size: state.kernel.len(),
        };
        if bucket.is_empty() {
            steps.push(step);
            continue;
        }
        let mut layer = FixingLayer::new();
        for (h, other) in state.buckets.iter().enumerate() {
            if h != v - 1 {
                for &id in other {
                    layer.fix(id, 0.0);
                }
            }
        }
        layer.push(model.objective_cap(state.incumbent));
        layer.push(LinearConstraint::new(
            Family::Extra,
            bucket.iter().map(|&id| (id, 1.0)).collect(),
            Sense::Ge,
            1.0,
        ));
        let out = solve_layer(backend, model, &layer, limit_v, None);
        step.status = Some(out.status);
        if let Some(sol) = out.solution(model) {
            let values = sol.to_primal(model);
            let promoted: Vec<VarId> = bucket
                .iter()
                .copied()
                .filter(|id| values[id.0] >= AT_LEAST_ONE)
                .collect();
            step.accepted = true;
            step.objective = Some(sol.objective);
            step.bucket_hits = promoted.len();
            state.kernel.extend(promoted.iter().copied());
            state.buckets[v - 1].retain(|id| !promoted.contains(id));
            if sol.objective <= state.incumbent {
                state.incumbent = sol.objective;
                best = sol;
            }
        }
        step.kernel_size = state.kernel.len();
        steps.push(step);
    }
    Ok(KsRun {
        best,
        initial,
        state,
        m2_status,
        steps,
        timing: budget.timing("ks"),
    })
}
