//! Dense solution arrays shaped by the instance dimensions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{MilpModel, VarKey};

/// Values snapped to an integer when this close.
const SNAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    /// `x[i][k][t][u]`, flattened.
    pub x: Vec<f64>,
    pub xb: Vec<f64>,
    pub xa: Vec<f64>,
    /// `y[i][j][k][t]`, flattened.
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// Carry-over out of period `p`, `[i][k]`.
    pub z_end: Vec<f64>,
    /// `R[k][t]`.
    pub r: Vec<f64>,
    pub g: Vec<f64>,
    pub f0: Vec<f64>,
    pub f: Vec<f64>,
    pub objective: f64,
    pub feasible: bool,
}

impl Solution {
    pub fn zeros(n: usize, m: usize, p: usize) -> Self {
        Solution {
            n,
            m,
            p,
            x: vec![0.0; n * m * p * p],
            xb: vec![0.0; n * m * p],
            xa: vec![0.0; n * m * p],
            y: vec![0.0; n * n * m * p],
            z: vec![0.0; n * m * p],
            z_end: vec![0.0; n * m],
            r: vec![0.0; m * p],
            g: vec![0.0; n * m * p],
            f0: vec![0.0; n * m * p],
            f: vec![0.0; n * n * m * p],
            objective: 0.0,
            feasible: false,
        }
    }

    pub fn for_instance(inst: &Instance) -> Self {
        Self::zeros(inst.n, inst.m, inst.p)
    }

    pub fn ikt(&self, i: usize, k: usize, t: usize) -> usize {
        (i * self.m + k) * self.p + t
    }

    pub fn iktu(&self, i: usize, k: usize, t: usize, u: usize) -> usize {
        self.ikt(i, k, t) * self.p + u
    }

    pub fn ijkt(&self, i: usize, j: usize, k: usize, t: usize) -> usize {
        ((i * self.n + j) * self.m + k) * self.p + t
    }

    pub fn kt(&self, k: usize, t: usize) -> usize {
        k * self.p + t
    }

    pub fn ik(&self, i: usize, k: usize) -> usize {
        i * self.m + k
    }

    pub fn y_at(&self, i: usize, j: usize, k: usize, t: usize) -> f64 {
        self.y[self.ijkt(i, j, k, t)]
    }

    pub fn z_at(&self, i: usize, k: usize, t: usize) -> f64 {
        if t == self.p {
            self.z_end[self.ik(i, k)]
        } else {
            self.z[self.ikt(i, k, t)]
        }
    }

    fn slot(&mut self, key: VarKey) -> &mut f64 {
        match key {
            VarKey::X { i, k, t, u } => {
                let idx = self.iktu(i, k, t, u);
                &mut self.x[idx]
            }
            VarKey::Xb { i, k, t } => {
                let idx = self.ikt(i, k, t);
                &mut self.xb[idx]
            }
            VarKey::Xa { i, k, t } => {
                let idx = self.ikt(i, k, t);
                &mut self.xa[idx]
            }
            VarKey::Y { i, j, k, t } => {
                let idx = self.ijkt(i, j, k, t);
                &mut self.y[idx]
            }
            VarKey::Z { i, k, t } => {
                let idx = self.ikt(i, k, t);
                &mut self.z[idx]
            }
            VarKey::ZEnd { i, k } => {
                let idx = self.ik(i, k);
                &mut self.z_end[idx]
            }
            VarKey::R { k, t } => {
                let idx = self.kt(k, t);
                &mut self.r[idx]
            }
            VarKey::G { i, k, t } => {
                let idx = self.ikt(i, k, t);
                &mut self.g[idx]
            }
            VarKey::F0 { i, k, t } => {
                let idx = self.ikt(i, k, t);
                &mut self.f0[idx]
            }
            VarKey::F { i, j, k, t } => {
                let idx = self.ijkt(i, j, k, t);
                &mut self.f[idx]
            }
        }
    }

    fn read(&self, key: VarKey) -> f64 {
        match key {
            VarKey::X { i, k, t, u } => self.x[self.iktu(i, k, t, u)],
            VarKey::Xb { i, k, t } => self.xb[self.ikt(i, k, t)],
            VarKey::Xa { i, k, t } => self.xa[self.ikt(i, k, t)],
            VarKey::Y { i, j, k, t } => self.y[self.ijkt(i, j, k, t)],
            VarKey::Z { i, k, t } => self.z[self.ikt(i, k, t)],
            VarKey::ZEnd { i, k } => self.z_end[self.ik(i, k)],
            VarKey::R { k, t } => self.r[self.kt(k, t)],
            VarKey::G { i, k, t } => self.g[self.ikt(i, k, t)],
            VarKey::F0 { i, k, t } => self.f0[self.ikt(i, k, t)],
            VarKey::F { i, j, k, t } => self.f[self.ijkt(i, j, k, t)],
        }
    }

    /// Scatters a primal vector into dense arrays. Integer-domain values
    /// within 1e-6 of an integer are snapped; tiny negative continuous values
    /// from solver round-off are clipped to 0.
    pub fn from_primal(model: &MilpModel, values: &[f64]) -> Self {
        let mut sol = Solution::zeros(model.n, model.m, model.p);
        for (var, &v) in model.vars.iter().zip(values) {
            let mut v = if var.domain.is_integral() && (v - v.round()).abs() <= SNAP {
                v.round()
            } else {
                v
            };
            if v < 0.0 && v > -SNAP {
                v = 0.0;
            }
            *sol.slot(var.key) = v;
        }
        sol.objective = model.objective_value(&sol.to_primal(model));
        sol
    }

    /// Gathers model-ordered values; entries without a model variable are
    /// dropped.
    pub fn to_primal(&self, model: &MilpModel) -> Vec<f64> {
        model.vars.iter().map(|v| self.read(v.key)).collect()
    }

    /// True when every integer-domain value of `model` is integral here.
    pub fn is_integral(&self, model: &MilpModel) -> bool {
        model
            .vars
            .iter()
            .filter(|v| v.domain.is_integral())
            .all(|v| {
                let x = self.read(v.key);
                (x - x.round()).abs() <= SNAP
            })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)
            .map_err(|e| Error::MalformedSolution(format!("serialize: {e}")))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::MalformedSolution(format!("{e}")))
    }

    fn check_shape(&self, inst: &Instance) -> Result<()> {
        let probe = Solution::zeros(inst.n, inst.m, inst.p);
        let ok = self.n == inst.n
            && self.m == inst.m
            && self.p == inst.p
            && self.x.len() == probe.x.len()
            && self.xb.len() == probe.xb.len()
            && self.xa.len() == probe.xa.len()
            && self.y.len() == probe.y.len()
            && self.z.len() == probe.z.len()
            && self.z_end.len() == probe.z_end.len()
            && self.r.len() == probe.r.len()
            && self.g.len() == probe.g.len()
            && self.f0.len() == probe.f0.len()
            && self.f.len() == probe.f.len();
        if ok {
            Ok(())
        } else {
            Err(Error::MalformedSolution(
                "array shapes do not match the instance".into(),
            ))
        }
    }

    pub(crate) fn arrays(&self) -> [(&'static str, &[f64]); 10] {
        [
            ("x", &self.x),
            ("xb", &self.xb),
            ("xa", &self.xa),
            ("y", &self.y),
            ("z", &self.z),
            ("z_end", &self.z_end),
            ("R", &self.r),
            ("G", &self.g),
            ("F0", &self.f0),
            ("F", &self.f),
        ]
    }
}

/// Inventory plus setup cost of `sol`, whether or not it is feasible.
pub fn evaluate_objective(inst: &Instance, sol: &Solution) -> Result<f64> {
    sol.check_shape(inst)?;
    for (name, arr) in sol.arrays() {
        if let Some(v) = arr.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::MalformedSolution(format!(
                "negative or NaN entry {v} in {name}"
            )));
        }
    }
    let (n, m, p) = (inst.n, inst.m, inst.p);
    let mut total = 0.0;
    for i in 0..n {
        for k in 0..m {
            for t in 0..p {
                for u in t..p {
                    total += (u - t) as f64 * inst.holding[i] * sol.x[sol.iktu(i, k, t, u)];
                }
                for j in 0..n {
                    total += inst.setup_cost[k][i][j] * sol.y[sol.ijkt(i, j, k, t)];
                }
            }
        }
    }
    Ok(total)
}
