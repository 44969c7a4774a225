use std::collections::BTreeMap;

use super::{Domain, Family, LinearConstraint, MilpModel, Sense, VarId, VarKey};
use crate::error::{Error, Result};
use crate::instance::Instance;

/// Sums duplicate ids and drops zero coefficients (self-loop arcs cancel in
/// the balance rows).
pub(crate) fn merge_terms(terms: Vec<(VarId, f64)>) -> Vec<(VarId, f64)> {
    let mut acc: BTreeMap<VarId, f64> = BTreeMap::new();
    for (v, a) in terms {
        *acc.entry(v).or_insert(0.0) += a;
    }
    acc.into_iter().filter(|&(_, a)| a != 0.0).collect()
}

struct Builder<'a> {
    inst: &'a Instance,
    model: MilpModel,
}

impl Builder<'_> {
    fn get(&self, key: VarKey) -> Option<VarId> {
        self.model.id(&key)
    }

    fn row(&mut self, family: Family, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        let terms = merge_terms(terms);
        self.model
            .constraints
            .push(LinearConstraint::new(family, terms, sense, rhs));
    }

    /// `(id, 1.0)` for every `y[j][i][k][t]` entering `i`.
    fn inflow(&self, i: usize, k: usize, t: usize) -> Vec<VarId> {
        (0..self.inst.n)
            .filter_map(|j| self.get(VarKey::Y { i: j, j: i, k, t }))
            .collect()
    }

    fn outflow(&self, i: usize, k: usize, t: usize) -> Vec<VarId> {
        (0..self.inst.n)
            .filter_map(|j| self.get(VarKey::Y { i, j, k, t }))
            .collect()
    }

    fn next_z(&self, i: usize, k: usize, t: usize) -> VarId {
        let key = if t + 1 == self.inst.p {
            VarKey::ZEnd { i, k }
        } else {
            VarKey::Z { i, k, t: t + 1 }
        };
        self.get(key).expect("carry-over variable declared")
    }

    fn declare(&mut self) {
        let inst = self.inst;
        let (n, m, p) = (inst.n, inst.m, inst.p);
        for k in 0..m {
            let items = inst.items_on(k);
            if items.is_empty() {
                continue;
            }
            for t in 0..p {
                for &i in &items {
                    for u in t..p {
                        if inst.demand[i][u] > 0.0 {
                            self.model.add_var(
                                VarKey::X { i, k, t, u },
                                Domain::Continuous,
                                0.0,
                                inst.demand[i][u],
                            );
                        }
                    }
                    self.model.add_var(
                        VarKey::Xb { i, k, t },
                        Domain::Continuous,
                        0.0,
                        f64::INFINITY,
                    );
                    self.model.add_var(
                        VarKey::Xa { i, k, t },
                        Domain::Continuous,
                        0.0,
                        f64::INFINITY,
                    );
                }
                for &i in &items {
                    for &j in &items {
                        // Self-loops stay declared but are pinned to zero.
                        let q = if i == j {
                            0.0
                        } else {
                            inst.setup_cap(j, k, t) as f64
                        };
                        self.model
                            .add_var(VarKey::Y { i, j, k, t }, Domain::Integer, 0.0, q);
                    }
                }
                for &i in &items {
                    self.model
                        .add_var(VarKey::Z { i, k, t }, Domain::Binary, 0.0, 1.0);
                    self.model
                        .add_var(VarKey::G { i, k, t }, Domain::Binary, 0.0, 1.0);
                }
                self.model
                    .add_var(VarKey::R { k, t }, Domain::Binary, 0.0, 1.0);
                for &i in &items {
                    self.model
                        .add_var(VarKey::F0 { i, k, t }, Domain::Continuous, 0.0, n as f64);
                }
                for &i in &items {
                    for &j in &items {
                        self.model.add_var(
                            VarKey::F { i, j, k, t },
                            Domain::Continuous,
                            0.0,
                            n as f64,
                        );
                    }
                }
            }
            for &i in &items {
                self.model
                    .add_var(VarKey::ZEnd { i, k }, Domain::Binary, 0.0, 1.0);
            }
        }
    }

    fn objective(&mut self) {
        let inst = self.inst;
        let mut obj = Vec::new();
        for (idx, var) in self.model.vars.iter().enumerate() {
            let c = match var.key {
                VarKey::X { i, t, u, .. } => (u - t) as f64 * inst.holding[i],
                VarKey::Y { i, j, k, .. } => inst.setup_cost[k][i][j],
                _ => 0.0,
            };
            if c != 0.0 {
                obj.push((VarId(idx), c));
            }
        }
        self.model.objective = obj;
    }

    fn lot_sizing(&mut self) -> Result<()> {
        let inst = self.inst;
        let (n, m, p) = (inst.n, inst.m, inst.p);
        for i in 0..n {
            for u in 0..p {
                if inst.demand[i][u] <= 0.0 {
                    continue;
                }
                let terms: Vec<_> = (0..m)
                    .flat_map(|k| (0..=u).map(move |t| (k, t)))
                    .filter_map(|(k, t)| self.get(VarKey::X { i, k, t, u }))
                    .map(|v| (v, 1.0))
                    .collect();
                if terms.is_empty() {
                    return Err(Error::InfeasibleByConstruction(format!(
                        "item {} has demand in period {} but no eligible machine",
                        i + 1,
                        u + 1
                    )));
                }
                self.row(Family::Demand, terms, Sense::Eq, inst.demand[i][u]);
            }
        }
        for k in 0..m {
            let items = inst.items_on(k);
            if items.is_empty() {
                continue;
            }
            for t in 0..p {
                let mut terms = Vec::new();
                for &i in &items {
                    for u in t..p {
                        if let Some(x) = self.get(VarKey::X { i, k, t, u }) {
                            terms.push((x, inst.proc_time[i][k][t]));
                        }
                    }
                    for &j in &items {
                        let y = self.get(VarKey::Y { i: j, j: i, k, t }).unwrap();
                        terms.push((y, inst.setup_time[k][j][i]));
                    }
                }
                self.row(Family::Capacity, terms, Sense::Le, inst.capacity[k][t]);
                for &i in &items {
                    let g = self.get(VarKey::G { i, k, t }).unwrap();
                    let big_m = inst.big_m(i, t);
                    for u in t..p {
                        if let Some(x) = self.get(VarKey::X { i, k, t, u }) {
                            self.row(
                                Family::ProductionLink,
                                vec![(x, 1.0), (g, -big_m)],
                                Sense::Le,
                                0.0,
                            );
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn setup_state(&mut self) {
        let inst = self.inst;
        for k in 0..inst.m {
            let items = inst.items_on(k);
            if items.is_empty() {
                continue;
            }
            for t in 0..inst.p {
                let zs: Vec<_> = items
                    .iter()
                    .map(|&i| (self.get(VarKey::Z { i, k, t }).unwrap(), 1.0))
                    .collect();
                self.row(Family::StartState, zs, Sense::Eq, 1.0);
                for &i in &items {
                    let z = self.get(VarKey::Z { i, k, t }).unwrap();
                    let g = self.get(VarKey::G { i, k, t }).unwrap();
                    let inflow = self.inflow(i, k, t);
                    let outflow = self.outflow(i, k, t);
                    let z_next = self.next_z(i, k, t);

                    let mut bal = vec![(z, 1.0), (z_next, -1.0)];
                    bal.extend(inflow.iter().map(|&y| (y, 1.0)));
                    bal.extend(outflow.iter().map(|&y| (y, -1.0)));
                    self.row(Family::SetupBalance, bal, Sense::Eq, 0.0);

                    let mut ready: Vec<_> = vec![(z, 1.0)];
                    ready.extend(inflow.iter().map(|&y| (y, 1.0)));
                    let mut lower = ready.clone();
                    lower.push((g, -1.0));
                    self.row(Family::ReadyLower, lower, Sense::Ge, 0.0);
                    let mut upper = ready;
                    upper.push((g, -(inst.setup_cap(i, k, t) as f64)));
                    self.row(Family::ReadyUpper, upper, Sense::Le, 0.0);
                }
                let r = self.get(VarKey::R { k, t }).unwrap();
                let ys: Vec<_> = items
                    .iter()
                    .flat_map(|&i| self.outflow(i, k, t))
                    .map(|y| (y, 1.0))
                    .collect();
                let mut up = ys.clone();
                up.push((r, -inst.big_count(k, t)));
                self.row(Family::SetupIndicatorUpper, up, Sense::Le, 0.0);
                let mut lo = ys;
                lo.push((r, -1.0));
                self.row(Family::SetupIndicatorLower, lo, Sense::Ge, 0.0);
            }
        }
    }

    fn min_lot(&mut self) {
        let inst = self.inst;
        let p = inst.p;
        for k in 0..inst.m {
            let items = inst.items_on(k);
            for t in 0..p {
                for &i in &items {
                    let xa = self.get(VarKey::Xa { i, k, t }).unwrap();
                    let xb = self.get(VarKey::Xb { i, k, t }).unwrap();
                    let z = self.get(VarKey::Z { i, k, t }).unwrap();
                    let big_m = inst.big_m(i, t);

                    let mut split: Vec<_> = (t..p)
                        .filter_map(|u| self.get(VarKey::X { i, k, t, u }))
                        .map(|x| (x, 1.0))
                        .collect();
                    split.push((xa, -1.0));
                    split.push((xb, -1.0));
                    self.row(Family::LotSplit, split, Sense::Eq, 0.0);
                    self.row(
                        Family::CarriedProduction,
                        vec![(xb, 1.0), (z, -big_m)],
                        Sense::Le,
                        0.0,
                    );

                    let lot = inst.min_lot[i];
                    if lot <= 0.0 {
                        continue;
                    }
                    let inflow = self.inflow(i, k, t);
                    let mut row = vec![(xa, 1.0), (self.next_z(i, k, t), lot)];
                    row.extend(inflow.iter().map(|&y| (y, -lot)));
                    self.row(Family::MinLot, row, Sense::Ge, 0.0);

                    for u in t + 1..p {
                        let mut row = vec![(xa, 1.0)];
                        for l in t + 1..=u {
                            row.push((self.get(VarKey::Xb { i, k, t: l }).unwrap(), 1.0));
                        }
                        row.extend(inflow.iter().map(|&y| (y, -lot)));
                        for l in t + 1..u {
                            row.push((self.get(VarKey::R { k, t: l }).unwrap(), big_m));
                        }
                        row.push((self.get(VarKey::R { k, t: u }).unwrap(), -big_m));
                        self.row(Family::MinLotSpan, row, Sense::Ge, -big_m);
                    }
                }
            }
        }
    }

    fn flow(&mut self) {
        let inst = self.inst;
        let n = inst.n as f64;
        for k in 0..inst.m {
            let items = inst.items_on(k);
            if items.is_empty() {
                continue;
            }
            for t in 0..inst.p {
                let mut src = Vec::new();
                for &i in &items {
                    src.push((self.get(VarKey::F0 { i, k, t }).unwrap(), 1.0));
                    src.push((self.get(VarKey::G { i, k, t }).unwrap(), -1.0));
                }
                self.row(Family::FlowSource, src, Sense::Eq, 0.0);
                for &i in &items {
                    let f0 = self.get(VarKey::F0 { i, k, t }).unwrap();
                    let g = self.get(VarKey::G { i, k, t }).unwrap();
                    let z = self.get(VarKey::Z { i, k, t }).unwrap();
                    let mut bal = vec![(f0, 1.0), (g, -1.0)];
                    for &j in &items {
                        bal.push((self.get(VarKey::F { i: j, j: i, k, t }).unwrap(), 1.0));
                        bal.push((self.get(VarKey::F { i, j, k, t }).unwrap(), -1.0));
                    }
                    self.row(Family::FlowBalance, bal, Sense::Eq, 0.0);
                    self.row(
                        Family::FlowSourceCap,
                        vec![(f0, 1.0), (z, -n)],
                        Sense::Le,
                        0.0,
                    );
                }
                for &i in &items {
                    for &j in &items {
                        let f = self.get(VarKey::F { i, j, k, t }).unwrap();
                        let y = self.get(VarKey::Y { i, j, k, t }).unwrap();
                        self.row(Family::FlowArcCap, vec![(f, 1.0), (y, -n)], Sense::Le, 0.0);
                    }
                }
            }
        }
    }
}

/// Builds the full MILP for `inst`. Variables for ineligible item/machine
/// pairs and `x` for zero-demand periods are not created.
pub fn build_base_model(inst: &Instance) -> Result<MilpModel> {
    inst.validate()?;
    let mut b = Builder {
        inst,
        model: MilpModel::empty(inst.n, inst.m, inst.p),
    };
    b.declare();
    b.objective();
    b.lot_sizing()?;
    b.setup_state();
    b.min_lot();
    b.flow();
    Ok(b.model)
}
