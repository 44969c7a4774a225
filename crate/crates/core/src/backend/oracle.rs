//! Exhaustive ground truth for tiny instances.
//!
//! Every changeover pattern per (machine, period, start state) is enumerated,
//! patterns are chained into machine plans, and plan combinations are scanned
//! in order of setup cost. Each surviving combination fixes `y, z, G, R`;
//! the remaining production problem in `x, xa, xb` is an LP solved with
//! `microlp`, independently of the MILP adapter.

use std::collections::VecDeque;
use std::time::Instant;

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::{SolveOutcome, SolveStatus};
use crate::error::{Error, Result};
use crate::eval::fill_flow;
use crate::instance::Instance;
use crate::model::build_base_model;
use crate::solution::Solution;

/// Cap on enumerated patterns, plans and plan combinations.
pub const ORACLE_MAX_CANDIDATES: usize = 2_000_000;

const LP_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub outcome: SolveOutcome,
    pub solution: Option<Solution>,
    /// Plan combinations whose residual LP was solved.
    pub lps_solved: usize,
}

/// Changeovers on one machine in one period, over the machine's items.
#[derive(Debug, Clone)]
struct Pattern {
    /// `y[a * L + b]`, positions into the machine's item list.
    y: Vec<u32>,
    end: usize,
    setup_cost: f64,
}

struct Counter(usize);

impl Counter {
    fn add(&mut self, n: usize) -> Result<()> {
        self.0 = self.0.saturating_add(n);
        if self.0 > ORACLE_MAX_CANDIDATES {
            return Err(Error::OracleGuard(format!(
                "enumeration exceeds {ORACLE_MAX_CANDIDATES} candidates; reduce q"
            )));
        }
        Ok(())
    }
}

/// All vectors of length `len` with non-negative entries summing to at most `cap`.
fn bounded_vectors(len: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; len];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, cap, &mut cur, &mut out);
    out
}

fn reachable_ok(l: usize, y: &[u32], start: usize, inflow: &[u32]) -> bool {
    let mut seen = vec![false; l];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(a) = queue.pop_front() {
        for b in 0..l {
            if !seen[b] && y[a * l + b] > 0 {
                seen[b] = true;
                queue.push_back(b);
            }
        }
    }
    (0..l).all(|b| inflow[b] == 0 || seen[b])
}

fn patterns(
    inst: &Instance,
    k: usize,
    t: usize,
    items: &[usize],
    start: usize,
    counter: &mut Counter,
) -> Result<Vec<Pattern>> {
    let l = items.len();
    let columns: Vec<Vec<Vec<u32>>> = (0..l)
        .map(|b| {
            let q = inst.setup_cap(items[b], k, t);
            // Self-loops are pinned to zero in the model.
            bounded_vectors(l - 1, q.saturating_sub(u32::from(b == start)))
                .into_iter()
                .map(|mut v| {
                    v.insert(b, 0);
                    v
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let total: usize = columns.iter().map(|c| c.len()).product();
    counter.add(total)?;

    let mut out = Vec::new();
    let mut choice = vec![0usize; l];
    loop {
        let mut y = vec![0u32; l * l];
        for (b, &c) in choice.iter().enumerate() {
            for a in 0..l {
                y[a * l + b] = columns[b][c][a];
            }
        }
        let inflow: Vec<u32> = (0..l).map(|b| (0..l).map(|a| y[a * l + b]).sum()).collect();
        let outflow: Vec<u32> = (0..l).map(|a| (0..l).map(|b| y[a * l + b]).sum()).collect();
        let ends: Vec<i64> = (0..l)
            .map(|a| i64::from(a == start) + i64::from(inflow[a]) - i64::from(outflow[a]))
            .collect();
        let setup_time: f64 = (0..l)
            .flat_map(|a| (0..l).map(move |b| (a, b)))
            .map(|(a, b)| inst.setup_time[k][items[a]][items[b]] * f64::from(y[a * l + b]))
            .sum();
        if ends.iter().all(|&e| e == 0 || e == 1)
            && setup_time <= inst.capacity[k][t] + LP_TOL
            && reachable_ok(l, &y, start, &inflow)
        {
            let end = ends.iter().position(|&e| e == 1).expect("one end state");
            let setup_cost = (0..l)
                .flat_map(|a| (0..l).map(move |b| (a, b)))
                .map(|(a, b)| inst.setup_cost[k][items[a]][items[b]] * f64::from(y[a * l + b]))
                .sum();
            out.push(Pattern { y, end, setup_cost });
        }
        // odometer over column choices
        let mut pos = 0;
        loop {
            if pos == l {
                return Ok(out);
            }
            choice[pos] += 1;
            if choice[pos] < columns[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// A machine plan: initial state plus one pattern per period.
#[derive(Debug, Clone)]
struct Plan {
    start: usize,
    steps: Vec<usize>,
    cost: f64,
}

/// Pattern table per period and start state, plus the plans built from it.
type MachinePlans = (Vec<Vec<Vec<Pattern>>>, Vec<Plan>);

fn machine_plans(
    inst: &Instance,
    k: usize,
    items: &[usize],
    counter: &mut Counter,
) -> Result<MachinePlans> {
    let l = items.len();
    // table[t][s] = patterns starting from state s in period t
    let mut table = Vec::with_capacity(inst.p);
    for t in 0..inst.p {
        let mut per_start = Vec::with_capacity(l);
        for s in 0..l {
            per_start.push(patterns(inst, k, t, items, s, counter)?);
        }
        table.push(per_start);
    }
    let mut plans = Vec::new();
    for s0 in 0..l {
        let mut stack = vec![(0usize, s0, Vec::<usize>::new(), 0.0f64)];
        while let Some((t, s, steps, cost)) = stack.pop() {
            if t == inst.p {
                counter.add(1)?;
                plans.push(Plan {
                    start: s0,
                    steps,
                    cost,
                });
                continue;
            }
            for (idx, pat) in table[t][s].iter().enumerate() {
                let mut next = steps.clone();
                next.push(idx);
                stack.push((t + 1, pat.end, next, cost + pat.setup_cost));
            }
        }
    }
    Ok((table, plans))
}

/// Writes `y, z, z_end, G, R` of a plan for machine `k` into `sol`.
fn apply_plan(
    sol: &mut Solution,
    k: usize,
    items: &[usize],
    table: &[Vec<Vec<Pattern>>],
    plan: &Plan,
) {
    let l = items.len();
    let mut state = plan.start;
    for (t, &idx) in plan.steps.iter().enumerate() {
        let pat = &table[t][state][idx];
        let mut any = false;
        for a in 0..l {
            for b in 0..l {
                let v = f64::from(pat.y[a * l + b]);
                let slot = sol.ijkt(items[a], items[b], k, t);
                sol.y[slot] = v;
                any |= v > 0.0;
            }
        }
        for (pos, &i) in items.iter().enumerate() {
            let z = f64::from(u8::from(pos == state));
            let slot = sol.ikt(i, k, t);
            sol.z[slot] = z;
            let inflow: u32 = (0..l).map(|a| pat.y[a * l + pos]).sum();
            sol.g[slot] = if z > 0.0 || inflow > 0 { 1.0 } else { 0.0 };
        }
        let rslot = sol.kt(k, t);
        sol.r[rslot] = f64::from(u8::from(any));
        state = pat.end;
    }
    for (pos, &i) in items.iter().enumerate() {
        let slot = sol.ik(i, k);
        sol.z_end[slot] = f64::from(u8::from(pos == state));
    }
}

/// Solves the production LP for fixed setup decisions. Returns the holding
/// cost and fills `x, xa, xb`, or `None` when infeasible.
fn residual_lp(inst: &Instance, sol: &mut Solution) -> Option<f64> {
    let (n, m, p) = (inst.n, inst.m, inst.p);
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mut x = vec![None; n * m * p * p];
    let mut xa = vec![None; n * m * p];
    let mut xb = vec![None; n * m * p];
    for i in 0..n {
        for k in 0..m {
            if !inst.eligible[i][k] {
                continue;
            }
            for t in 0..p {
                let g = sol.g[sol.ikt(i, k, t)];
                let big_m = inst.big_m(i, t);
                for u in t..p {
                    let d = inst.demand[i][u];
                    if d > 0.0 {
                        let ub = if g > 0.5 { d.min(big_m) } else { 0.0 };
                        let cost = (u - t) as f64 * inst.holding[i];
                        x[sol.iktu(i, k, t, u)] = Some(lp.add_var(cost, (0.0, ub)));
                    }
                }
                let zb = sol.z[sol.ikt(i, k, t)];
                let slot = sol.ikt(i, k, t);
                xb[slot] = Some(lp.add_var(0.0, (0.0, big_m * zb)));
                xa[slot] = Some(lp.add_var(0.0, (0.0, f64::INFINITY)));
            }
        }
    }
    for i in 0..n {
        for u in 0..p {
            let d = inst.demand[i][u];
            if d <= 0.0 {
                continue;
            }
            let terms: Vec<_> = (0..m)
                .flat_map(|k| (0..=u).map(move |t| (k, t)))
                .filter_map(|(k, t)| x[sol.iktu(i, k, t, u)].map(|v| (v, 1.0)))
                .collect();
            if terms.is_empty() {
                return None;
            }
            lp.add_constraint(terms, ComparisonOp::Eq, d);
        }
    }
    for k in 0..m {
        for t in 0..p {
            let mut setup = 0.0;
            let mut terms = Vec::new();
            for i in 0..n {
                if !inst.eligible[i][k] {
                    continue;
                }
                for j in 0..n {
                    setup += inst.setup_time[k][j][i] * sol.y[sol.ijkt(j, i, k, t)];
                }
                for u in t..p {
                    if let Some(v) = x[sol.iktu(i, k, t, u)] {
                        terms.push((v, inst.proc_time[i][k][t]));
                    }
                }
            }
            if terms.is_empty() {
                if setup > inst.capacity[k][t] + LP_TOL {
                    return None;
                }
                continue;
            }
            lp.add_constraint(terms, ComparisonOp::Le, inst.capacity[k][t] - setup);
        }
    }
    for i in 0..n {
        for k in 0..m {
            if !inst.eligible[i][k] {
                continue;
            }
            for t in 0..p {
                let slot = sol.ikt(i, k, t);
                let (a, b) = (xa[slot].unwrap(), xb[slot].unwrap());
                let mut split: Vec<_> = (t..p)
                    .filter_map(|u| x[sol.iktu(i, k, t, u)].map(|v| (v, 1.0)))
                    .collect();
                split.push((a, -1.0));
                split.push((b, -1.0));
                lp.add_constraint(split, ComparisonOp::Eq, 0.0);

                let lot = inst.min_lot[i];
                if lot <= 0.0 {
                    continue;
                }
                let inflow: f64 = (0..n).map(|j| sol.y[sol.ijkt(j, i, k, t)]).sum();
                let z_next = sol.z_at(i, k, t + 1);
                let rhs = lot * (inflow - z_next);
                if rhs > 0.0 {
                    lp.add_constraint([(a, 1.0)], ComparisonOp::Ge, rhs);
                }
                let big_m = inst.big_m(i, t);
                for u in t + 1..p {
                    let between: f64 = (t + 1..u).map(|l| sol.r[sol.kt(k, l)]).sum();
                    let rhs = lot * inflow - big_m * (between + 1.0 - sol.r[sol.kt(k, u)]);
                    if rhs <= 0.0 {
                        continue;
                    }
                    let mut terms = vec![(a, 1.0)];
                    for l in t + 1..=u {
                        terms.push((xb[sol.ikt(i, k, l)].unwrap(), 1.0));
                    }
                    lp.add_constraint(terms, ComparisonOp::Ge, rhs);
                }
            }
        }
    }
    let outcome = lp.solve().ok()?;
    let res = outcome.solution()?;
    for (slot, v) in x.iter().enumerate() {
        sol.x[slot] = v.map_or(0.0, |v| res.var_value(v).max(0.0));
    }
    for (slot, v) in xa.iter().enumerate() {
        sol.xa[slot] = v.map_or(0.0, |v| res.var_value(v).max(0.0));
    }
    for (slot, v) in xb.iter().enumerate() {
        sol.xb[slot] = v.map_or(0.0, |v| res.var_value(v).max(0.0));
    }
    Some(res.objective())
}

/// Exhaustive optimum with diagnostics. Requires `n <= 3`, `m <= 2`, `p <= 3`.
pub fn exact_oracle(inst: &Instance) -> Result<OracleResult> {
    if inst.n > 3 || inst.m > 2 || inst.p > 3 {
        return Err(Error::OracleGuard(format!(
            "oracle needs n <= 3, m <= 2, p <= 3; got n={} m={} p={}",
            inst.n, inst.m, inst.p
        )));
    }
    inst.validate()?;
    let clock = Instant::now();
    let infeasible = |lps| {
        Ok(OracleResult {
            outcome: SolveOutcome::failed(
                SolveStatus::Infeasible,
                clock.elapsed().as_secs_f64(),
                None,
            ),
            solution: None,
            lps_solved: lps,
        })
    };
    let model = match build_base_model(inst) {
        Ok(m) => m,
        Err(Error::InfeasibleByConstruction(_)) => return infeasible(0),
        Err(e) => return Err(e),
    };

    let mut counter = Counter(0);
    let mut machines = Vec::new();
    for k in 0..inst.m {
        let items = inst.items_on(k);
        if items.is_empty() {
            continue;
        }
        let (table, mut plans) = machine_plans(inst, k, &items, &mut counter)?;
        if plans.is_empty() {
            return infeasible(0);
        }
        plans.sort_by(|a, b| a.cost.total_cmp(&b.cost));
        machines.push((k, items, table, plans));
    }

    // all plan combinations ordered by total setup cost
    let sizes: Vec<usize> = machines.iter().map(|m| m.3.len()).collect();
    let combos: usize = sizes.iter().product();
    counter.add(combos)?;
    let mut order: Vec<(f64, Vec<usize>)> = Vec::with_capacity(combos);
    let mut choice = vec![0usize; sizes.len()];
    'outer: loop {
        let cost = machines
            .iter()
            .zip(&choice)
            .map(|(m, &c)| m.3[c].cost)
            .sum();
        order.push((cost, choice.clone()));
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                break 'outer;
            }
            choice[pos] += 1;
            if choice[pos] < sizes[pos] {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best: Option<(f64, Solution)> = None;
    let mut lps = 0;
    for (cost, choice) in order {
        if let Some((z, _)) = &best {
            if cost >= *z - LP_TOL {
                break;
            }
        }
        let mut sol = Solution::for_instance(inst);
        for ((k, items, table, plans), &c) in machines.iter().zip(&choice) {
            apply_plan(&mut sol, *k, items, table, &plans[c]);
        }
        lps += 1;
        if let Some(holding) = residual_lp(inst, &mut sol) {
            let total = cost + holding;
            if best.as_ref().is_none_or(|(z, _)| total < *z - LP_TOL) {
                best = Some((total, sol));
            }
        }
    }

    let Some((_, mut sol)) = best else {
        return infeasible(lps);
    };
    fill_flow(inst, &mut sol);
    sol.objective = crate::solution::evaluate_objective(inst, &sol)?;
    sol.feasible = true;
    Ok(OracleResult {
        outcome: SolveOutcome {
            status: SolveStatus::Optimal,
            values: sol.to_primal(&model),
            objective: sol.objective,
            best_bound: sol.objective,
            reduced_costs: None,
            wall_time: clock.elapsed().as_secs_f64(),
            message: None,
        },
        solution: Some(sol),
        lps_solved: lps,
    })
}

/// Global optimum of a tiny instance as a [`SolveOutcome`].
pub fn solve_exact_oracle(inst: &Instance) -> Result<SolveOutcome> {
    exact_oracle(inst).map(|r| r.outcome)
}
