//! Benchmark instance classes and the instance file format.

mod io;
mod triangle;

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceMeta};

pub use io::{
    format_instance, parse_instance, read_instance, write_instance, FORMAT_VERSION, RNG_NAME,
};
pub use triangle::{verify_nontriangular, TriangleReport};

/// Minimum lot imposed on shortcut items.
pub const SHORTCUT_MIN_LOT: f64 = 25.0;
/// Capacity jitter of the parallel-machine classes.
pub const PARALLEL_CUT_VAR: f64 = 0.5;

pub const HOLDING_RANGE: (u32, u32) = (2, 9);
pub const DEMAND_RANGE: (u32, u32) = (40, 59);
pub const SETUP_TIME_RANGE: (u32, u32) = (5, 10);
pub const SHORTCUT_TIME_RANGE: (u32, u32) = (2, 4);

/// Parameters of an instance class, rendered as
/// `Data<m>-<n>-<p>-<Cut>-<Theta>[-<MProb%>-<MBal%>]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSpec {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub cut: f64,
    pub cut_var: f64,
    pub theta: f64,
    /// Probability that an extra machine can produce an item.
    pub m_prob: Option<f64>,
    /// Largest allowed spread of per-machine item counts, as a share of `n`.
    pub m_bal: Option<f64>,
}

fn fmt_rate(v: f64) -> String {
    format!("{v}")
}

fn pct(v: f64) -> String {
    format!("{}", (v * 100.0).round() as i64)
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Data{}-{}-{}-{}-{}",
            self.m,
            self.n,
            self.p,
            fmt_rate(self.cut),
            self.theta
        )?;
        if let (Some(mp), Some(mb)) = (self.m_prob, self.m_bal) {
            write!(f, "-{}-{}", pct(mp), pct(mb))?;
        }
        Ok(())
    }
}

impl FromStr for ClassSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidClassSpec {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let body = s
            .strip_prefix("Data")
            .ok_or_else(|| bad("must start with `Data`"))?;
        let parts: Vec<&str> = body.split('-').collect();
        if parts.len() != 5 && parts.len() != 7 {
            return Err(bad(
                "expected Data<m>-<n>-<p>-<Cut>-<Theta>[-<MProb>-<MBal>]",
            ));
        }
        let int = |x: &str, what: &str| {
            x.parse::<usize>()
                .map_err(|_| bad(&format!("{what} `{x}` is not a positive integer")))
        };
        let real = |x: &str, what: &str| {
            x.parse::<f64>()
                .map_err(|_| bad(&format!("{what} `{x}` is not a number")))
        };
        let m = int(parts[0], "m")?;
        let n = int(parts[1], "n")?;
        let p = int(parts[2], "p")?;
        let cut = real(parts[3], "Cut")?;
        let theta = real(parts[4], "Theta")?;
        let (m_prob, m_bal) = if parts.len() == 7 {
            (
                Some(real(parts[5], "MProb")? / 100.0),
                Some(real(parts[6], "MBal")? / 100.0),
            )
        } else {
            (None, None)
        };
        let spec = ClassSpec {
            m,
            n,
            p,
            cut,
            cut_var: if m > 1 { PARALLEL_CUT_VAR } else { 0.0 },
            theta,
            m_prob,
            m_bal,
        };
        spec.check().map_err(|e| match e {
            Error::InvalidClassSpec { reason, .. } => bad(&reason),
            other => other,
        })?;
        Ok(spec)
    }
}

impl ClassSpec {
    pub fn check(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::InvalidClassSpec {
                spec: self.to_string(),
                reason,
            })
        };
        if self.m == 0 || self.n == 0 || self.p == 0 {
            return bad("m, n and p must be positive".into());
        }
        let rate = |v: f64| v > 0.0 && v <= 1.0;
        if !rate(self.cut) {
            return bad(format!("Cut {} outside (0, 1]", self.cut));
        }
        if !(0.0..1.0).contains(&self.cut_var) {
            return bad(format!("CutVar {} outside [0, 1)", self.cut_var));
        }
        if self.theta.is_nan() || self.theta <= 0.0 {
            return bad("Theta must be positive".into());
        }
        match (self.m > 1, self.m_prob, self.m_bal) {
            (true, Some(mp), Some(mb)) => {
                if !rate(mp) || !rate(mb) {
                    return bad("MProb and MBal must lie in (0, 1]".into());
                }
            }
            (true, _, _) => return bad("parallel classes need MProb and MBal".into()),
            (false, None, None) => {}
            (false, _, _) => return bad("single-machine classes take no MProb/MBal".into()),
        }
        Ok(())
    }

    /// Shortcut items drawn per machine.
    pub fn shortcut_count(&self) -> usize {
        self.n.div_ceil(10)
    }
}

/// The 26 benchmark classes: 16 single-machine, 10 parallel-machine.
pub fn catalog() -> Vec<String> {
    let mut out = Vec::new();
    for theta in [50, 100] {
        for cut in ["0.6", "0.8"] {
            for n in [15, 25] {
                for p in [10, 15] {
                    out.push(format!("Data1-{n}-{p}-{cut}-{theta}"));
                }
            }
        }
    }
    out.extend(
        [
            "Data2-15-5-0.8-50-80-20",
            "Data2-15-10-0.8-50-80-20",
            "Data3-15-5-0.8-50-80-20",
            "Data3-15-10-0.8-50-80-20",
            "Data3-15-10-0.6-100-60-20",
            "Data2-15-10-0.8-100-80-20",
            "Data2-20-10-0.8-100-80-20",
            "Data2-15-10-0.8-100-60-20",
            "Data2-15-10-0.8-100-80-10",
            "Data3-15-10-0.8-100-60-20",
        ]
        .map(String::from),
    );
    out
}

/// Parses `name` and insists that it is one of [`catalog`].
pub fn catalog_class(name: &str) -> Result<ClassSpec> {
    if !catalog().iter().any(|c| c == name) {
        return Err(Error::InvalidClassSpec {
            spec: name.to_string(),
            reason: format!("unknown class; valid names:\n  {}", catalog().join("\n  ")),
        });
    }
    name.parse()
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (u32, u32)) -> f64 {
    f64::from(rng.gen_range(lo..=hi))
}

/// Item-machine eligibility: a random home machine per item, extra machines
/// with probability `m_prob`, then items are added to the least loaded
/// machine until counts differ by at most `m_bal * n`.
fn draw_eligibility(spec: &ClassSpec, rng: &mut ChaCha8Rng) -> Vec<Vec<bool>> {
    let (n, m) = (spec.n, spec.m);
    if m == 1 {
        return vec![vec![true]; n];
    }
    let m_prob = spec.m_prob.unwrap_or(1.0);
    let mut elig = vec![vec![false; m]; n];
    for row in elig.iter_mut() {
        let home = rng.gen_range(0..m);
        for (k, cell) in row.iter_mut().enumerate() {
            *cell = k == home || rng.gen_bool(m_prob);
        }
    }
    let limit = spec.m_bal.unwrap_or(1.0) * n as f64;
    loop {
        let counts: Vec<usize> = (0..m)
            .map(|k| elig.iter().filter(|row| row[k]).count())
            .collect();
        let (kmin, &lo) = counts.iter().enumerate().min_by_key(|&(_, c)| *c).unwrap();
        let hi = *counts.iter().max().unwrap();
        if (hi - lo) as f64 <= limit + 1e-9 {
            return elig;
        }
        let missing: Vec<usize> = (0..n).filter(|&i| !elig[i][kmin]).collect();
        let pick = missing[rng.gen_range(0..missing.len())];
        elig[pick][kmin] = true;
    }
}

/// Draws one instance of `spec`; identical `(spec, seed)` give identical data.
pub fn generate(spec: &ClassSpec, seed: u64) -> Result<Instance> {
    spec.check()?;
    let (n, m, p) = (spec.n, spec.m, spec.p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = Instance::blank(n, m, p);
    inst.meta = InstanceMeta {
        seed: Some(seed),
        spec: Some(spec.to_string()),
    };

    for h in inst.holding.iter_mut() {
        *h = uniform(&mut rng, HOLDING_RANGE);
    }
    for row in inst.demand.iter_mut() {
        for d in row.iter_mut() {
            *d = uniform(&mut rng, DEMAND_RANGE);
        }
    }
    for k in 0..m {
        for i in 0..n {
            for j in 0..n {
                inst.setup_time[k][i][j] = if i == j {
                    0.0
                } else {
                    uniform(&mut rng, SETUP_TIME_RANGE)
                };
            }
        }
    }
    inst.eligible = draw_eligibility(spec, &mut rng);

    let count = spec.shortcut_count().min(n);
    let mut shortcut = Vec::with_capacity(m);
    for k in 0..m {
        let mut chosen: Vec<usize> = sample(&mut rng, n, count).into_vec();
        chosen.sort_unstable();
        for &l in &chosen {
            for j in 0..n {
                if j != l {
                    inst.setup_time[k][l][j] = uniform(&mut rng, SHORTCUT_TIME_RANGE);
                    inst.setup_time[k][j][l] = uniform(&mut rng, SHORTCUT_TIME_RANGE);
                }
            }
            inst.min_lot[l] = SHORTCUT_MIN_LOT;
        }
        shortcut.push(chosen);
    }
    inst.shortcut = Some(shortcut);

    for k in 0..m {
        for i in 0..n {
            for j in 0..n {
                inst.setup_cost[k][i][j] = spec.theta * inst.setup_time[k][i][j];
            }
        }
    }

    // One machine at `Cut * demand` could never meet demand, so there Cut is
    // read as the utilisation `demand / T`.
    let base = |total: f64| {
        if m == 1 {
            total / spec.cut
        } else {
            spec.cut * total
        }
    };
    for t in 0..p {
        let total: f64 = (0..n).map(|i| inst.demand[i][t]).sum();
        let mut w: Vec<f64> = (0..m)
            .map(|_| {
                if spec.cut_var > 0.0 {
                    rng.gen_range(1.0 - spec.cut_var..=1.0 + spec.cut_var)
                } else {
                    1.0
                }
            })
            .collect();
        let mean = w.iter().sum::<f64>() / m as f64;
        for v in w.iter_mut() {
            *v /= mean;
        }
        for (k, wk) in w.iter().enumerate() {
            inst.capacity[k][t] = base(total) * wk;
        }
    }
    inst.validate()?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_26_parseable_names() {
        let names = catalog();
        assert_eq!(names.len(), 26);
        for name in &names {
            let spec: ClassSpec = name.parse().unwrap();
            assert_eq!(&spec.to_string(), name);
        }
    }

    #[test]
    fn parallel_class_fields() {
        let spec = catalog_class("Data2-15-5-0.8-50-80-20").unwrap();
        assert_eq!((spec.m, spec.n, spec.p), (2, 15, 5));
        assert_eq!(spec.cut, 0.8);
        assert_eq!(spec.theta, 50.0);
        assert_eq!(spec.m_prob, Some(0.8));
        assert_eq!(spec.m_bal, Some(0.2));
        assert_eq!(spec.shortcut_count(), 2);
    }

    #[test]
    fn single_machine_class_is_fully_eligible() {
        let spec = catalog_class("Data1-15-10-0.6-50").unwrap();
        assert!(spec.m_prob.is_none());
        let inst = generate(&spec, 7).unwrap();
        assert!(inst.eligible.iter().all(|r| r == &vec![true]));
    }

    #[test]
    fn unknown_class_lists_catalog() {
        let err = catalog_class("Data9-1-1-0.5-10").unwrap_err().to_string();
        assert!(err.contains("Data2-20-10-0.8-100-80-20"));
        assert!("Data2-15-5".parse::<ClassSpec>().is_err());
        assert!("Data2-15-5-0.8-50".parse::<ClassSpec>().is_err());
    }

    #[test]
    fn same_seed_same_instance() {
        let spec = catalog_class("Data3-15-5-0.8-50-80-20").unwrap();
        assert_eq!(generate(&spec, 11).unwrap(), generate(&spec, 11).unwrap());
        assert_ne!(generate(&spec, 11).unwrap(), generate(&spec, 12).unwrap());
    }

    #[test]
    fn balance_repair_holds() {
        let spec = catalog_class("Data2-15-10-0.8-100-80-10").unwrap();
        for seed in 0..50 {
            let inst = generate(&spec, seed).unwrap();
            let counts: Vec<usize> = (0..2).map(|k| inst.items_on(k).len()).collect();
            let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
            assert!(spread as f64 <= 0.1 * 15.0 + 1e-9);
            assert!((0..15).all(|i| inst.eligible[i].iter().any(|&e| e)));
        }
    }

    #[test]
    fn capacity_totals() {
        for (name, per_machine) in [
            ("Data1-15-10-0.6-50", 1.0 / 0.6),
            ("Data3-15-10-0.6-100-60-20", 0.6),
        ] {
            let spec = catalog_class(name).unwrap();
            let inst = generate(&spec, 5).unwrap();
            for t in 0..spec.p {
                let demand: f64 = (0..spec.n).map(|i| inst.demand[i][t]).sum();
                let fleet: f64 = (0..spec.m).map(|k| inst.capacity[k][t]).sum();
                let want = per_machine * spec.m as f64 * demand;
                assert!((fleet - want).abs() <= 1e-6, "{name} t={t}");
            }
        }
    }
}
