//! Problem data.
//!
//! Indices are zero-based throughout the library: items `0..n`, machines
//! `0..m`, periods `0..p`. The on-disk format and the CLI print item indices
//! one-based.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance recorded in the instance file header.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub seed: Option<u64>,
    pub spec: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub meta: InstanceMeta,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    /// `h[i]`, inventory cost per unit and period.
    pub holding: Vec<f64>,
    /// `minLot[i]`.
    pub min_lot: Vec<f64>,
    /// `d[i][t]`.
    pub demand: Vec<Vec<f64>>,
    /// `T[k][t]`.
    pub capacity: Vec<Vec<f64>>,
    /// `eligible[i][k]`.
    pub eligible: Vec<Vec<bool>>,
    /// Optional override of `q[i][k][t]`; `None` means [`default_setup_cap`].
    pub setup_cap: Option<Vec<Vec<Vec<u32>>>>,
    /// `f[i][k][t]`.
    pub proc_time: Vec<Vec<Vec<f64>>>,
    /// `b[k][i][j]`, time to change machine `k` from item `i` to item `j`.
    pub setup_time: Vec<Vec<Vec<f64>>>,
    /// `c[k][i][j]`.
    pub setup_cost: Vec<Vec<Vec<f64>>>,
    /// Shortcut items per machine, when known.
    pub shortcut: Option<Vec<Vec<usize>>>,
}

impl Instance {
    /// An instance with zero costs and times, unit processing times, every
    /// item eligible everywhere and no demand. Handy as a starting point.
    pub fn blank(n: usize, m: usize, p: usize) -> Self {
        Instance {
            meta: InstanceMeta::default(),
            n,
            m,
            p,
            holding: vec![0.0; n],
            min_lot: vec![0.0; n],
            demand: vec![vec![0.0; p]; n],
            capacity: vec![vec![0.0; p]; m],
            eligible: vec![vec![true; m]; n],
            setup_cap: None,
            proc_time: vec![vec![vec![1.0; p]; m]; n],
            setup_time: vec![vec![vec![0.0; n]; n]; m],
            setup_cost: vec![vec![vec![0.0; n]; n]; m],
            shortcut: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m, p) = (self.n, self.m, self.p);
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if n == 0 || m == 0 || p == 0 {
            return bad(format!(
                "dimensions must be positive, got n={n} m={m} p={p}"
            ));
        }
        if self.holding.len() != n || self.min_lot.len() != n {
            return bad("holding/min_lot length differs from n".into());
        }
        if self.demand.len() != n || self.demand.iter().any(|r| r.len() != p) {
            return bad("demand must be n x p".into());
        }
        if self.capacity.len() != m || self.capacity.iter().any(|r| r.len() != p) {
            return bad("capacity must be m x p".into());
        }
        if self.eligible.len() != n || self.eligible.iter().any(|r| r.len() != m) {
            return bad("eligibility must be n x m".into());
        }
        let cube = |v: &Vec<Vec<Vec<f64>>>, a: usize, b: usize, c: usize| {
            v.len() == a
                && v.iter()
                    .all(|r| r.len() == b && r.iter().all(|s| s.len() == c))
        };
        if !cube(&self.proc_time, n, m, p) {
            return bad("processing times must be n x m x p".into());
        }
        if !cube(&self.setup_time, m, n, n) || !cube(&self.setup_cost, m, n, n) {
            return bad("setup times and costs must be m x n x n".into());
        }
        let all_values = self
            .holding
            .iter()
            .chain(&self.min_lot)
            .chain(self.demand.iter().flatten())
            .chain(self.capacity.iter().flatten())
            .chain(self.proc_time.iter().flatten().flatten())
            .chain(self.setup_time.iter().flatten().flatten())
            .chain(self.setup_cost.iter().flatten().flatten());
        for v in all_values {
            if !v.is_finite() || *v < 0.0 {
                return bad(format!(
                    "parameter values must be finite and >= 0, found {v}"
                ));
            }
        }
        if let Some(q) = &self.setup_cap {
            if q.len() != n
                || q.iter()
                    .any(|r| r.len() != m || r.iter().any(|s| s.len() != p))
            {
                return bad("setup cap override must be n x m x p".into());
            }
            for (i, (qi, elig)) in q.iter().zip(&self.eligible).enumerate() {
                for (k, qik) in qi.iter().enumerate() {
                    if elig[k] && qik.iter().any(|&v| v < 1) {
                        return bad(format!(
                            "q must be >= 1 for eligible item {} machine {}",
                            i + 1,
                            k + 1
                        ));
                    }
                }
            }
        }
        if let Some(sc) = &self.shortcut {
            if sc.len() != m {
                return bad("shortcut section needs one line per machine".into());
            }
            if sc.iter().flatten().any(|&i| i >= n) {
                return bad("shortcut item index out of range".into());
            }
        }
        Ok(())
    }

    pub fn is_eligible(&self, i: usize, k: usize) -> bool {
        self.eligible[i][k]
    }

    /// Items eligible on machine `k`, ascending.
    pub fn items_on(&self, k: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.eligible[i][k]).collect()
    }

    pub fn big_m(&self, i: usize, t: usize) -> f64 {
        default_big_m(self, i, t)
    }

    /// `q[i][k][t]`, honouring a per-instance override.
    pub fn setup_cap(&self, i: usize, k: usize, t: usize) -> u32 {
        match &self.setup_cap {
            Some(q) => q[i][k][t],
            None => default_setup_cap(self, i, k, t),
        }
    }

    /// Upper bound on the number of changeovers on `(k, t)`.
    pub fn big_count(&self, k: usize, t: usize) -> f64 {
        self.items_on(k)
            .into_iter()
            .map(|i| self.setup_cap(i, k, t) as f64)
            .sum()
    }

    /// The shortcut set as a flat item set (union over machines).
    pub fn shortcut_items(&self) -> BTreeSet<usize> {
        match &self.shortcut {
            Some(per_machine) => per_machine.iter().flatten().copied().collect(),
            None => derive_shortcut_items(self),
        }
    }
}

/// Remaining cumulative demand `sum_{u >= t} d[i][u]`.
pub fn default_big_m(inst: &Instance, i: usize, t: usize) -> f64 {
    inst.demand[i][t..].iter().sum()
}

/// Capacity-implied cap on how often machine `k` can be readied for `i` in `t`.
pub fn default_setup_cap(inst: &Instance, i: usize, k: usize, t: usize) -> u32 {
    let lot = inst.min_lot[i].max(1.0);
    let min_setup = (0..inst.n)
        .filter(|&j| j != i && inst.eligible[j][k])
        .map(|j| inst.setup_time[k][j][i])
        .fold(f64::INFINITY, f64::min);
    let min_setup = if min_setup.is_finite() {
        min_setup
    } else {
        0.0
    };
    let denom = lot * inst.proc_time[i][k][t] + min_setup;
    if denom <= 0.0 {
        return 1;
    }
    let raw = (inst.capacity[k][t] / denom).floor();
    if raw < 1.0 {
        1
    } else if raw > u32::MAX as f64 {
        u32::MAX
    } else {
        raw as u32
    }
}

/// Items `l` through which some changeover `i -> l -> j` is strictly faster
/// than the direct `i -> j` on some machine.
pub fn derive_shortcut_items(inst: &Instance) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for k in 0..inst.m {
        let b = &inst.setup_time[k];
        for l in 0..inst.n {
            if out.contains(&l) {
                continue;
            }
            'search: for i in 0..inst.n {
                if i == l {
                    continue;
                }
                for j in 0..inst.n {
                    if j == l || j == i {
                        continue;
                    }
                    if b[i][l] + b[l][j] < b[i][j] {
                        out.insert(l);
                        break 'search;
                    }
                }
            }
        }
    }
    out
}
