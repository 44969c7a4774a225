//! Backend-neutral MILP representation.

mod build;
mod layer;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use build::build_base_model;
pub use layer::{DomainOverride, FixingLayer, LoweredModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Continuous,
    Binary,
    Integer,
}

impl Domain {
    pub fn is_integral(self) -> bool {
        !matches!(self, Domain::Continuous)
    }
}

/// Symbol and zero-based subscripts of a model variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarKey {
    X {
        i: usize,
        k: usize,
        t: usize,
        u: usize,
    },
    Xb {
        i: usize,
        k: usize,
        t: usize,
    },
    Xa {
        i: usize,
        k: usize,
        t: usize,
    },
    Y {
        i: usize,
        j: usize,
        k: usize,
        t: usize,
    },
    Z {
        i: usize,
        k: usize,
        t: usize,
    },
    /// Setup state carried out of the last period.
    ZEnd {
        i: usize,
        k: usize,
    },
    R {
        k: usize,
        t: usize,
    },
    G {
        i: usize,
        k: usize,
        t: usize,
    },
    F0 {
        i: usize,
        k: usize,
        t: usize,
    },
    F {
        i: usize,
        j: usize,
        k: usize,
        t: usize,
    },
}

impl VarKey {
    pub fn symbol(&self) -> &'static str {
        match self {
            VarKey::X { .. } => "x",
            VarKey::Xb { .. } => "xb",
            VarKey::Xa { .. } => "xa",
            VarKey::Y { .. } => "y",
            VarKey::Z { .. } => "z",
            VarKey::ZEnd { .. } => "z_end",
            VarKey::R { .. } => "R",
            VarKey::G { .. } => "G",
            VarKey::F0 { .. } => "F0",
            VarKey::F { .. } => "F",
        }
    }

    /// Period of the variable, if it has one.
    pub fn period(&self) -> Option<usize> {
        match *self {
            VarKey::X { t, .. }
            | VarKey::Xb { t, .. }
            | VarKey::Xa { t, .. }
            | VarKey::Y { t, .. }
            | VarKey::Z { t, .. }
            | VarKey::R { t, .. }
            | VarKey::G { t, .. }
            | VarKey::F0 { t, .. }
            | VarKey::F { t, .. } => Some(t),
            VarKey::ZEnd { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub key: VarKey,
    pub domain: Domain,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// Constraint family, used for diagnostics and for the substitution checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Demand,
    Capacity,
    ProductionLink,
    StartState,
    SetupBalance,
    ReadyLower,
    ReadyUpper,
    LotSplit,
    CarriedProduction,
    MinLot,
    MinLotSpan,
    FlowSource,
    FlowBalance,
    FlowSourceCap,
    FlowArcCap,
    SetupIndicatorUpper,
    SetupIndicatorLower,
    Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub family: Family,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn new(family: Family, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) -> Self {
        LinearConstraint {
            family,
            terms,
            sense,
            rhs,
        }
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violates the row, 0 when satisfied.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimisation MILP with an index from `(symbol, subscripts)` to ids.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub vars: Vec<Variable>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Vec<(VarId, f64)>,
    index: HashMap<VarKey, VarId>,
}

impl MilpModel {
    pub(crate) fn empty(n: usize, m: usize, p: usize) -> Self {
        MilpModel {
            n,
            m,
            p,
            vars: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub(crate) fn add_var(&mut self, key: VarKey, domain: Domain, lower: f64, upper: f64) -> VarId {
        debug_assert!(!self.index.contains_key(&key), "duplicate variable {key:?}");
        let id = VarId(self.vars.len());
        self.vars.push(Variable {
            key,
            domain,
            lower,
            upper,
        });
        self.index.insert(key, id);
        id
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn id(&self, key: &VarKey) -> Option<VarId> {
        self.index.get(key).copied()
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn count_symbol(&self, symbol: &str) -> usize {
        self.vars
            .iter()
            .filter(|v| v.key.symbol() == symbol)
            .count()
    }

    /// Ids of all `y` variables with their subscripts, in declaration order.
    pub fn y_vars(&self) -> Vec<(VarId, (usize, usize, usize, usize))> {
        self.vars
            .iter()
            .enumerate()
            .filter_map(|(idx, v)| match v.key {
                VarKey::Y { i, j, k, t } => Some((VarId(idx), (i, j, k, t))),
                _ => None,
            })
            .collect()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Objective row as a constraint `objective <= cap`.
    pub fn objective_cap(&self, cap: f64) -> LinearConstraint {
        LinearConstraint::new(Family::Extra, self.objective.clone(), Sense::Le, cap)
    }

    /// Largest constraint or bound violation of a full primal vector.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(values))
            .fold(0.0, f64::max);
        let bounds = self
            .vars
            .iter()
            .zip(values)
            .map(|(v, &x)| {
                let mut viol = (v.lower - x).max(0.0).max(x - v.upper);
                if v.domain.is_integral() {
                    viol = viol.max((x - x.round()).abs());
                }
                viol
            })
            .fold(0.0, f64::max);
        rows.max(bounds)
    }
}
