use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::BenchmarkRecord;
use crate::error::{Error, Result};

/// Percentage gap of an upper bound over a positive lower bound.
pub fn gap_l(ub: f64, lb: f64) -> Result<f64> {
    if lb.is_nan() || lb <= 0.0 || !lb.is_finite() || !ub.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "gap needs a finite positive lower bound, got ub={ub} lb={lb}"
        )));
    }
    Ok(100.0 * (ub - lb) / lb)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub method: String,
    /// `(tau, theta)` pairs with ascending tau.
    pub points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// Step-function value at `tau`.
    pub fn theta_at(&self, tau: f64) -> f64 {
        self.points
            .iter()
            .take_while(|(t, _)| *t <= tau)
            .last()
            .map_or(0.0, |&(_, th)| th)
    }
}

/// Relative slack when comparing against `tau * best`.
const RATIO_EPS: f64 = 1e-12;

fn best_per_instance(records: &[BenchmarkRecord]) -> BTreeMap<&str, Option<f64>> {
    let mut best: BTreeMap<&str, Option<f64>> = BTreeMap::new();
    for r in records {
        let slot = best.entry(r.instance.as_str()).or_insert(None);
        if let (true, Some(ub)) = (r.feasible, r.ub) {
            *slot = Some(slot.map_or(ub, |b: f64| b.min(ub)));
        }
    }
    best
}

fn within(ub: f64, tau: f64, best: f64) -> bool {
    ub <= tau * best + RATIO_EPS * best.abs().max(1.0)
}

/// Every ratio `ub / best` that occurs, plus 1, ascending.
pub fn default_taus(records: &[BenchmarkRecord]) -> Vec<f64> {
    let best = best_per_instance(records);
    let mut taus = vec![1.0];
    for r in records {
        if let (true, Some(ub), Some(Some(b))) = (r.feasible, r.ub, best.get(r.instance.as_str())) {
            if *b > 0.0 {
                taus.push(ub / b);
            }
        }
    }
    taus.sort_by(f64::total_cmp);
    taus.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    taus
}

/// `theta_M(tau)`: share of instances where method `M` is feasible with an
/// upper bound within `tau` times the best upper bound of any method.
pub fn performance_profile(records: &[BenchmarkRecord], taus: &[f64]) -> Vec<ProfileCurve> {
    let best = best_per_instance(records);
    let total = best.len().max(1) as f64;
    let methods: BTreeSet<&str> = records.iter().map(|r| r.method.as_str()).collect();
    let mut taus = taus.to_vec();
    taus.sort_by(f64::total_cmp);
    methods
        .into_iter()
        .map(|method| {
            let mine: Vec<&BenchmarkRecord> =
                records.iter().filter(|r| r.method == method).collect();
            let points = taus
                .iter()
                .map(|&tau| {
                    let hits = best
                        .iter()
                        .filter(|(inst, b)| {
                            let Some(b) = b else { return false };
                            mine.iter().any(|r| {
                                r.instance == **inst
                                    && r.feasible
                                    && r.ub.is_some_and(|ub| within(ub, tau, *b))
                            })
                        })
                        .count();
                    (tau, hits as f64 / total)
                })
                .collect();
            ProfileCurve {
                method: method.to_string(),
                points,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ABetter,
    BBetter,
    NoSignificance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p_value: f64,
    pub mean_diff: f64,
    pub verdict: Verdict,
}

/// Two-sided paired t-test on `a - b`. Lower values win.
pub fn paired_t_test(a: &[f64], b: &[f64], alpha: f64) -> Result<TTest> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "paired samples need equal length >= 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    let by_sign = |mean: f64| {
        if mean < 0.0 {
            Verdict::ABetter
        } else {
            Verdict::BBetter
        }
    };
    if sd == 0.0 {
        return Ok(if mean == 0.0 {
            TTest {
                t: 0.0,
                p_value: 1.0,
                mean_diff: 0.0,
                verdict: Verdict::NoSignificance,
            }
        } else {
            TTest {
                t: mean.signum() * f64::INFINITY,
                p_value: 0.0,
                mean_diff: mean,
                verdict: by_sign(mean),
            }
        });
    }
    let t = mean * n.sqrt() / sd;
    let dist = StudentsT::new(0.0, 1.0, n - 1.0)
        .map_err(|e| Error::InvalidArgument(format!("t distribution: {e}")))?;
    let p_value = (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0);
    let verdict = if p_value < alpha {
        by_sign(mean)
    } else {
        Verdict::NoSignificance
    };
    Ok(TTest {
        t,
        p_value,
        mean_diff: mean,
        verdict,
    })
}
