use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::build::merge_terms;
use super::{Domain, LinearConstraint, MilpModel, Sense, VarId};
use crate::error::{Error, Result};

const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DomainOverride {
    /// Continuous on `[lower, upper]`.
    Relaxed { lower: f64, upper: f64 },
    /// Integer on the original bounds, even when the request relaxes
    /// integrality elsewhere.
    ForceInteger,
}

/// Restrictions stacked on top of a base model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixingLayer {
    pub fixed: BTreeMap<VarId, f64>,
    pub domain_override: BTreeMap<VarId, DomainOverride>,
    pub extra: Vec<LinearConstraint>,
}

impl FixingLayer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty() && self.domain_override.is_empty() && self.extra.is_empty()
    }

    pub fn fix(&mut self, id: VarId, value: f64) {
        self.domain_override.remove(&id);
        self.fixed.insert(id, value);
    }

    pub fn relax(&mut self, id: VarId, lower: f64, upper: f64) {
        self.fixed.remove(&id);
        self.domain_override
            .insert(id, DomainOverride::Relaxed { lower, upper });
    }

    pub fn force_integer(&mut self, id: VarId) {
        self.fixed.remove(&id);
        self.domain_override
            .insert(id, DomainOverride::ForceInteger);
    }

    pub fn push(&mut self, c: LinearConstraint) {
        self.extra.push(c);
    }

    pub fn check(&self, model: &MilpModel) -> Result<()> {
        let nv = model.num_vars();
        for (&id, &value) in &self.fixed {
            if id.0 >= nv {
                return Err(Error::InvalidLayer(format!("fixed id {id} not in model")));
            }
            if self.domain_override.contains_key(&id) {
                return Err(Error::InvalidLayer(format!(
                    "{id} is both fixed and overridden"
                )));
            }
            let var = model.var(id);
            if !value.is_finite() || value < var.lower - BOUND_TOL || value > var.upper + BOUND_TOL
            {
                return Err(Error::InvalidLayer(format!(
                    "fixed value {value} for {:?} outside [{}, {}]",
                    var.key, var.lower, var.upper
                )));
            }
        }
        for (&id, ov) in &self.domain_override {
            if id.0 >= nv {
                return Err(Error::InvalidLayer(format!(
                    "override id {id} not in model"
                )));
            }
            if let DomainOverride::Relaxed { lower, upper } = *ov {
                if lower > upper || lower.is_nan() || upper.is_nan() {
                    return Err(Error::InvalidLayer(format!(
                        "empty relaxed interval [{lower}, {upper}] for {id}"
                    )));
                }
            }
        }
        for c in &self.extra {
            if let Some(&(v, _)) = c.terms.iter().find(|(v, _)| v.0 >= nv) {
                return Err(Error::InvalidLayer(format!(
                    "extra constraint references undeclared {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Column and row arrays ready for a solver, row-wise sparse.
#[derive(Debug, Clone)]
pub struct LoweredModel {
    pub col_cost: Vec<f64>,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
    pub row_start: Vec<usize>,
    pub row_index: Vec<usize>,
    pub row_value: Vec<f64>,
}

impl LoweredModel {
    pub fn num_cols(&self) -> usize {
        self.col_cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_lower.len()
    }

    pub fn has_integers(&self) -> bool {
        self.integer.iter().any(|&b| b)
    }
}

impl MilpModel {
    /// Applies `layer` (fixings as bound tightening, domain swaps, appended
    /// rows) and flattens the result. With `relax_all`, every domain becomes
    /// continuous except those forced integer by the layer.
    pub fn lower(&self, layer: Option<&FixingLayer>, relax_all: bool) -> Result<LoweredModel> {
        let empty = FixingLayer::default();
        let layer = layer.unwrap_or(&empty);
        layer.check(self)?;

        let nv = self.num_vars();
        let mut col_cost = vec![0.0; nv];
        for &(v, c) in &self.objective {
            col_cost[v.0] += c;
        }
        let mut col_lower = Vec::with_capacity(nv);
        let mut col_upper = Vec::with_capacity(nv);
        let mut integer = Vec::with_capacity(nv);
        for (idx, var) in self.vars.iter().enumerate() {
            let id = VarId(idx);
            let (lo, up, int) = if let Some(&v) = layer.fixed.get(&id) {
                (v, v, var.domain.is_integral() && !relax_all)
            } else {
                match layer.domain_override.get(&id) {
                    Some(DomainOverride::Relaxed { lower, upper }) => (*lower, *upper, false),
                    Some(DomainOverride::ForceInteger) => (var.lower, var.upper, true),
                    None => (
                        var.lower,
                        var.upper,
                        var.domain != Domain::Continuous && !relax_all,
                    ),
                }
            };
            col_lower.push(lo);
            col_upper.push(up);
            integer.push(int);
        }

        let rows = self.constraints.iter().chain(layer.extra.iter());
        let mut row_lower = Vec::new();
        let mut row_upper = Vec::new();
        let mut row_start = vec![0];
        let mut row_index = Vec::new();
        let mut row_value = Vec::new();
        for c in rows {
            let (lo, up) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, c.rhs),
                Sense::Ge => (c.rhs, f64::INFINITY),
                Sense::Eq => (c.rhs, c.rhs),
            };
            row_lower.push(lo);
            row_upper.push(up);
            for (v, a) in merge_terms(c.terms.clone()) {
                row_index.push(v.0);
                row_value.push(a);
            }
            row_start.push(row_index.len());
        }
        Ok(LoweredModel {
            col_cost,
            col_lower,
            col_upper,
            integer,
            row_lower,
            row_upper,
            row_start,
            row_index,
            row_value,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;
    use crate::model::{build_base_model, Family, VarKey};

    fn model() -> MilpModel {
        let mut inst = Instance::blank(2, 1, 2);
        inst.demand = vec![vec![3.0, 4.0], vec![1.0, 2.0]];
        inst.capacity = vec![vec![50.0, 50.0]];
        build_base_model(&inst).unwrap()
    }

    #[test]
    fn fixing_tightens_bounds() {
        let m = model();
        let y = m
            .id(&VarKey::Y {
                i: 0,
                j: 1,
                k: 0,
                t: 0,
            })
            .unwrap();
        let mut layer = FixingLayer::new();
        layer.fix(y, 1.0);
        let low = m.lower(Some(&layer), false).unwrap();
        assert_eq!((low.col_lower[y.0], low.col_upper[y.0]), (1.0, 1.0));
        assert!(low.integer[y.0]);
    }

    #[test]
    fn out_of_bounds_fix_rejected() {
        let m = model();
        let z = m.id(&VarKey::Z { i: 0, k: 0, t: 0 }).unwrap();
        let mut layer = FixingLayer::new();
        layer.fix(z, 2.0);
        assert!(matches!(
            m.lower(Some(&layer), false),
            Err(Error::InvalidLayer(_))
        ));
    }

    #[test]
    fn overlapping_keys_rejected() {
        let m = model();
        let z = m.id(&VarKey::Z { i: 0, k: 0, t: 0 }).unwrap();
        let mut layer = FixingLayer::new();
        layer.fixed.insert(z, 1.0);
        layer.domain_override.insert(
            z,
            DomainOverride::Relaxed {
                lower: 0.0,
                upper: 1.0,
            },
        );
        assert!(layer.check(&m).is_err());
    }

    #[test]
    fn force_integer_survives_relax_all() {
        let m = model();
        let y = m
            .id(&VarKey::Y {
                i: 1,
                j: 0,
                k: 0,
                t: 1,
            })
            .unwrap();
        let mut layer = FixingLayer::new();
        layer.force_integer(y);
        let low = m.lower(Some(&layer), true).unwrap();
        assert!(low.integer[y.0]);
        assert_eq!(low.integer.iter().filter(|&&b| b).count(), 1);
    }

    #[test]
    fn relax_then_fix_equals_fix_then_relax() {
        let m = model();
        let y = m
            .id(&VarKey::Y {
                i: 0,
                j: 1,
                k: 0,
                t: 1,
            })
            .unwrap();
        let mut layer = FixingLayer::new();
        layer.fix(y, 0.0);
        layer.push(m.objective_cap(100.0));
        let a = m.lower(Some(&layer), true).unwrap();
        let mut relaxed = m.clone();
        for v in &mut relaxed.vars {
            v.domain = Domain::Continuous;
        }
        let b = relaxed.lower(Some(&layer), false).unwrap();
        assert_eq!(a.col_lower, b.col_lower);
        assert_eq!(a.col_upper, b.col_upper);
        assert_eq!(a.integer, b.integer);
        assert_eq!(a.row_value, b.row_value);
    }

    #[test]
    fn extra_rows_are_appended() {
        let m = model();
        let mut layer = FixingLayer::new();
        layer.push(LinearConstraint::new(
            Family::Extra,
            vec![(VarId(0), 1.0)],
            Sense::Ge,
            1.0,
        ));
        let low = m.lower(Some(&layer), false).unwrap();
        assert_eq!(low.num_rows(), m.num_constraints() + 1);
        layer.push(LinearConstraint::new(
            Family::Extra,
            vec![(VarId(usize::MAX), 1.0)],
            Sense::Ge,
            1.0,
        ));
        assert!(m.lower(Some(&layer), false).is_err());
    }
}
