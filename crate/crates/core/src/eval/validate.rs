//! Direct feasibility checks on solution arrays, without any MILP machinery.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::Instance;
use crate::solution::Solution;
use crate::TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Check {
    Demand,
    Capacity,
    SetupLink,
    Carryover,
    FlowPath,
    MinLot,
    Domain,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Check::Demand => "demand",
            Check::Capacity => "capacity",
            Check::SetupLink => "setup-link",
            Check::Carryover => "carryover",
            Check::FlowPath => "flow-path",
            Check::MinLot => "min-lot",
            Check::Domain => "domain",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: Check,
    /// Human-readable, one-based subscripts.
    pub at: String,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn count(&self, check: Check) -> usize {
        self.violations.iter().filter(|v| v.check == check).count()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.feasible {
            return f.write_str("feasible");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in self.violations.iter().take(5) {
            write!(f, "; {} {} by {:.3e}", v.check, v.at, v.magnitude)?;
        }
        Ok(())
    }
}

struct Checker<'a> {
    inst: &'a Instance,
    sol: &'a Solution,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn flag(&mut self, check: Check, magnitude: f64, at: impl FnOnce() -> String) {
        if magnitude > TOL || magnitude.is_nan() {
            self.out.push(Violation {
                check,
                at: at(),
                magnitude,
            });
        }
    }

    fn le(&mut self, check: Check, lhs: f64, rhs: f64, at: impl FnOnce() -> String) {
        self.flag(check, lhs - rhs, at);
    }

    fn eq(&mut self, check: Check, lhs: f64, rhs: f64, at: impl FnOnce() -> String) {
        self.flag(check, (lhs - rhs).abs(), at);
    }

    fn inflow(&self, i: usize, k: usize, t: usize) -> f64 {
        (0..self.inst.n).map(|j| self.sol.y_at(j, i, k, t)).sum()
    }

    fn outflow(&self, i: usize, k: usize, t: usize) -> f64 {
        (0..self.inst.n).map(|j| self.sol.y_at(i, j, k, t)).sum()
    }

    fn domain(&mut self) {
        let (inst, sol) = (self.inst, self.sol);
        let (n, m, p) = (inst.n, inst.m, inst.p);
        for (name, arr) in sol.arrays() {
            for (idx, &v) in arr.iter().enumerate() {
                if !v.is_finite() {
                    self.flag(Check::Domain, f64::NAN, || {
                        format!("{name}[{idx}] not finite")
                    });
                } else {
                    self.flag(Check::Domain, -v, || format!("{name}[{idx}] negative"));
                }
            }
        }
        let binary = |v: f64| v.abs().min((v - 1.0).abs());
        for k in 0..m {
            for t in 0..p {
                let r = sol.r[sol.kt(k, t)];
                self.flag(Check::Domain, binary(r), || {
                    format!("R[{}][{}]", k + 1, t + 1)
                });
            }
            for i in 0..n {
                let eligible = inst.eligible[i][k];
                let ze = sol.z_end[sol.ik(i, k)];
                let off = |v: f64| if eligible { binary(v) } else { v.abs() };
                self.flag(Check::Domain, off(ze), || {
                    format!("z[{}][{}][{}]", i + 1, k + 1, p + 1)
                });
                for t in 0..p {
                    let slot = sol.ikt(i, k, t);
                    self.flag(Check::Domain, off(sol.z[slot]), || {
                        format!("z[{}][{}][{}]", i + 1, k + 1, t + 1)
                    });
                    self.flag(Check::Domain, off(sol.g[slot]), || {
                        format!("G[{}][{}][{}]", i + 1, k + 1, t + 1)
                    });
                    if !eligible {
                        let stray = sol.xa[slot].abs()
                            + sol.xb[slot].abs()
                            + (t..p)
                                .map(|u| sol.x[sol.iktu(i, k, t, u)].abs())
                                .sum::<f64>();
                        self.flag(Check::Domain, stray, || {
                            format!(
                                "production of item {} on ineligible machine {}",
                                i + 1,
                                k + 1
                            )
                        });
                    }
                    for u in 0..t {
                        let v = sol.x[sol.iktu(i, k, t, u)].abs();
                        self.flag(Check::Domain, v, || {
                            format!(
                                "x[{}][{}][{}][{}] serves an earlier period",
                                i + 1,
                                k + 1,
                                t + 1,
                                u + 1
                            )
                        });
                    }
                    for j in 0..n {
                        let y = sol.y_at(i, j, k, t);
                        let at = || format!("y[{}][{}][{}][{}]", i + 1, j + 1, k + 1, t + 1);
                        if !(eligible && inst.eligible[j][k]) {
                            self.flag(Check::Domain, y.abs(), at);
                            continue;
                        }
                        self.flag(Check::Domain, (y - y.round()).abs(), at);
                        let q = inst.setup_cap(j, k, t) as f64;
                        self.flag(Check::Domain, y - q, at);
                    }
                }
            }
        }
    }

    fn demand_and_capacity(&mut self) {
        let (inst, sol) = (self.inst, self.sol);
        let (n, m, p) = (inst.n, inst.m, inst.p);
        for i in 0..n {
            for u in 0..p {
                let served: f64 = (0..m)
                    .flat_map(|k| (0..=u).map(move |t| (k, t)))
                    .map(|(k, t)| sol.x[sol.iktu(i, k, t, u)])
                    .sum();
                self.eq(Check::Demand, served, inst.demand[i][u], || {
                    format!("item {} period {}", i + 1, u + 1)
                });
            }
        }
        for k in 0..m {
            for t in 0..p {
                let mut used = 0.0;
                for i in 0..n {
                    for u in t..p {
                        used += inst.proc_time[i][k][t] * sol.x[sol.iktu(i, k, t, u)];
                    }
                    used += inst.setup_time[k][i]
                        .iter()
                        .enumerate()
                        .map(|(j, b)| b * sol.y_at(i, j, k, t))
                        .sum::<f64>();
                }
                self.le(Check::Capacity, used, inst.capacity[k][t], || {
                    format!("machine {} period {}", k + 1, t + 1)
                });
            }
        }
    }

    fn setup_state(&mut self) {
        let (inst, sol) = (self.inst, self.sol);
        let (m, p) = (inst.m, inst.p);
        for k in 0..m {
            let items = inst.items_on(k);
            if items.is_empty() {
                continue;
            }
            for t in 0..p {
                let at = || format!("machine {} period {}", k + 1, t + 1);
                let zsum: f64 = items.iter().map(|&i| sol.z_at(i, k, t)).sum();
                self.eq(Check::Carryover, zsum, 1.0, at);

                let total: f64 = items.iter().map(|&i| self.outflow(i, k, t)).sum();
                let r = sol.r[sol.kt(k, t)];
                self.le(Check::SetupLink, total, inst.big_count(k, t) * r, at);
                self.le(Check::SetupLink, r, total, at);

                for &i in &items {
                    let at = || format!("item {} machine {} period {}", i + 1, k + 1, t + 1);
                    let z = sol.z_at(i, k, t);
                    let z_next = sol.z_at(i, k, t + 1);
                    let g = sol.g[sol.ikt(i, k, t)];
                    let inflow = self.inflow(i, k, t);
                    let outflow = self.outflow(i, k, t);
                    self.eq(Check::Carryover, z + inflow, outflow + z_next, at);
                    self.le(Check::SetupLink, g, z + inflow, at);
                    let q = inst.setup_cap(i, k, t) as f64;
                    self.le(Check::SetupLink, z + inflow, q * g, at);
                    let big_m = inst.big_m(i, t);
                    for u in t..p {
                        let x = sol.x[sol.iktu(i, k, t, u)];
                        self.le(Check::SetupLink, x, big_m * g, at);
                    }
                    let xb = sol.xb[sol.ikt(i, k, t)];
                    self.le(Check::Carryover, xb, big_m * z, at);
                }
            }
        }
    }

    fn min_lot(&mut self) {
        let (inst, sol) = (self.inst, self.sol);
        let p = inst.p;
        for k in 0..inst.m {
            for i in inst.items_on(k) {
                for t in 0..p {
                    let at = || format!("item {} machine {} period {}", i + 1, k + 1, t + 1);
                    let slot = sol.ikt(i, k, t);
                    let (xa, xb) = (sol.xa[slot], sol.xb[slot]);
                    let produced: f64 = (t..p).map(|u| sol.x[sol.iktu(i, k, t, u)]).sum();
                    self.eq(Check::MinLot, produced, xa + xb, at);

                    let lot = inst.min_lot[i];
                    if lot <= 0.0 {
                        continue;
                    }
                    let inflow = self.inflow(i, k, t);
                    let z_next = sol.z_at(i, k, t + 1);
                    self.le(Check::MinLot, lot * (inflow - z_next), xa, at);
                    let big_m = inst.big_m(i, t);
                    for u in t + 1..p {
                        let carried: f64 = (t + 1..=u).map(|l| sol.xb[sol.ikt(i, k, l)]).sum();
                        let between: f64 = (t + 1..u).map(|l| sol.r[sol.kt(k, l)]).sum();
                        let rhs = lot * inflow - big_m * (between + 1.0 - sol.r[sol.kt(k, u)]);
                        self.le(Check::MinLot, rhs, xa + carried, || {
                            format!(
                                "item {} machine {} lot from period {} to {}",
                                i + 1,
                                k + 1,
                                t + 1,
                                u + 1
                            )
                        });
                    }
                }
            }
        }
    }

    fn flow_paths(&mut self) {
        let (inst, sol) = (self.inst, self.sol);
        for k in 0..inst.m {
            let items = inst.items_on(k);
            if items.is_empty() {
                continue;
            }
            for t in 0..inst.p {
                let reached = reachable(inst, sol, k, t);
                for &i in &items {
                    if sol.g[sol.ikt(i, k, t)] > 0.5 && !reached[i] {
                        self.flag(Check::FlowPath, 1.0, || {
                            format!(
                                "item {} on machine {} period {} not reachable from the start state",
                                i + 1,
                                k + 1,
                                t + 1
                            )
                        });
                    }
                }
            }
        }
    }
}

/// BFS tree over changeover arcs from the period's start state(s).
/// Returns `(reached, parent)`.
fn spanning_tree(
    inst: &Instance,
    sol: &Solution,
    k: usize,
    t: usize,
) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = inst.n;
    let mut seen = vec![false; n];
    let mut parent = vec![None; n];
    let mut queue = VecDeque::new();
    for i in inst.items_on(k) {
        if sol.z_at(i, k, t) > 0.5 {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !seen[j] && inst.eligible[j][k] && sol.y_at(i, j, k, t) > 0.5 {
                seen[j] = true;
                parent[j] = Some(i);
                queue.push_back(j);
            }
        }
    }
    (seen, parent)
}

fn reachable(inst: &Instance, sol: &Solution, k: usize, t: usize) -> Vec<bool> {
    spanning_tree(inst, sol, k, t).0
}

/// Overwrites `F` and `F0` with a flow routed along a BFS tree of the
/// changeover arcs. Returns false when some ready item cannot be reached.
pub fn fill_flow(inst: &Instance, sol: &mut Solution) -> bool {
    let mut ok = true;
    for k in 0..inst.m {
        let items = inst.items_on(k);
        for t in 0..inst.p {
            for &i in &items {
                let s = sol.ikt(i, k, t);
                sol.f0[s] = 0.0;
                for &j in &items {
                    let s = sol.ijkt(i, j, k, t);
                    sol.f[s] = 0.0;
                }
            }
            let (seen, parent) = spanning_tree(inst, sol, k, t);
            for &i in &items {
                if sol.g[sol.ikt(i, k, t)] <= 0.5 {
                    continue;
                }
                if !seen[i] {
                    ok = false;
                    continue;
                }
                // one unit from the origin to every ready item along the tree
                let mut node = i;
                while let Some(par) = parent[node] {
                    let s = sol.ijkt(par, node, k, t);
                    sol.f[s] += 1.0;
                    node = par;
                }
                let s = sol.ikt(node, k, t);
                sol.f0[s] += 1.0;
            }
        }
    }
    ok
}

/// Checks every constraint family of the model directly on `sol`.
pub fn validate(inst: &Instance, sol: &Solution) -> ValidationReport {
    let shaped = Solution::zeros(inst.n, inst.m, inst.p);
    let same_shape = sol.n == inst.n
        && sol.m == inst.m
        && sol.p == inst.p
        && sol
            .arrays()
            .iter()
            .zip(shaped.arrays().iter())
            .all(|(a, b)| a.1.len() == b.1.len());
    if !same_shape {
        return ValidationReport {
            feasible: false,
            violations: vec![Violation {
                check: Check::Domain,
                at: "array shapes do not match the instance".into(),
                magnitude: f64::INFINITY,
            }],
        };
    }
    let mut c = Checker {
        inst,
        sol,
        out: Vec::new(),
    };
    c.domain();
    c.demand_and_capacity();
    c.setup_state();
    c.min_lot();
    c.flow_paths();
    ValidationReport {
        feasible: c.out.is_empty(),
        violations: c.out,
    }
}
