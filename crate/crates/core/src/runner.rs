//! Runs a list of methods on one instance and turns the results into
//! benchmark records. RF and FO are executed once and shared by every
//! method built on them.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::backend::{exact_oracle, MilpBackend, SolveRequest};
use crate::error::{Error, Result};
use crate::eval::{gap_l, validate, BenchmarkRecord, ValidationReport};
use crate::heuristics::{
    psi_for, run_ks, run_rfo, run_rfo_pr, HeuristicConfig, KsRun, PhaseTiming, PrTrace, Problem,
    RfoRun,
};
use crate::instance::Instance;
use crate::solution::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    Rf,
    Fo,
    Rfo,
    RfoPr,
    RfoKs,
    RfoPrStar,
    RfoKsStar,
    Exact,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Rf,
        Method::Fo,
        Method::Rfo,
        Method::RfoPr,
        Method::RfoKs,
        Method::RfoPrStar,
        Method::RfoKsStar,
        Method::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rf => "rf",
            Method::Fo => "fo",
            Method::Rfo => "rfo",
            Method::RfoPr => "rfo-pr",
            Method::RfoKs => "rfo-ks",
            Method::RfoPrStar => "rfo-pr-star",
            Method::RfoKsStar => "rfo-ks-star",
            Method::Exact => "exact",
        }
    }

    /// Comma-separated list; duplicates are dropped, order is kept.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let m: Method = part.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument("empty method list".into()));
        }
        Ok(out)
    }

    fn needs_rfo(self) -> bool {
        self != Method::Exact
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown method `{s}`; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Outcome of one method on one instance.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    /// Validated solution, if any.
    pub solution: Option<Solution>,
    pub validation: Option<ValidationReport>,
    pub time_s: f64,
    /// Phases the method is made of, each against its own limit.
    pub timings: Vec<PhaseTiming>,
    pub error: Option<String>,
}

impl MethodRun {
    fn failed(method: Method, time_s: f64, error: String) -> Self {
        MethodRun {
            method,
            solution: None,
            validation: None,
            time_s,
            timings: Vec::new(),
            error: Some(error),
        }
    }

    pub fn feasible(&self) -> bool {
        self.solution.as_ref().is_some_and(|s| s.feasible)
    }

    pub fn objective(&self) -> Option<f64> {
        self.solution
            .as_ref()
            .filter(|s| s.feasible)
            .map(|s| s.objective)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub cfg: HeuristicConfig,
    /// Solve the base model for `cfg.time_limit_lb` seconds to get a bound.
    pub lower_bound: bool,
}

/// Everything produced for one instance.
#[derive(Debug, Clone)]
pub struct InstanceReport {
    pub instance: String,
    pub seed: u64,
    pub lb: Option<f64>,
    pub runs: Vec<MethodRun>,
    pub rfo: Option<RfoRun>,
    pub pr_traces: Vec<(Method, Vec<PrTrace>)>,
    pub ks_runs: Vec<(Method, KsRun)>,
}

impl InstanceReport {
    pub fn run(&self, method: Method) -> Option<&MethodRun> {
        self.runs.iter().find(|r| r.method == method)
    }

    pub fn records(&self) -> Vec<BenchmarkRecord> {
        self.runs
            .iter()
            .map(|r| {
                let ub = r.objective();
                BenchmarkRecord {
                    instance: self.instance.clone(),
                    method: r.method.name().to_string(),
                    seed: self.seed,
                    ub,
                    lb: self.lb,
                    gap_l: ub.zip(self.lb).and_then(|(u, l)| gap_l(u, l).ok()),
                    time_s: r.time_s,
                    feasible: r.feasible(),
                }
            })
            .collect()
    }
}

/// Validates `sol` and wraps it; rejected solutions are kept out.
fn finish(
    inst: &Instance,
    method: Method,
    sol: Option<Solution>,
    time_s: f64,
    timings: Vec<PhaseTiming>,
) -> MethodRun {
    let Some(mut sol) = sol else {
        return MethodRun {
            method,
            solution: None,
            validation: None,
            time_s,
            timings,
            error: Some("no feasible solution found".into()),
        };
    };
    let report = validate(inst, &sol);
    sol.feasible = report.feasible;
    let error = (!report.feasible).then(|| format!("validator rejected solution: {report}"));
    MethodRun {
        method,
        solution: report.feasible.then_some(sol),
        validation: Some(report),
        time_s,
        timings,
        error,
    }
}

fn run_exact(
    inst: &Instance,
    problem: &Problem<'_>,
    cfg: &HeuristicConfig,
    backend: &mut dyn MilpBackend,
) -> MethodRun {
    let clock = Instant::now();
    let sol = match exact_oracle(inst) {
        Ok(res) => res.solution,
        Err(Error::OracleGuard(_)) => {
            let out = backend.solve(&SolveRequest::new(&problem.model, cfg.time_limit_exact));
            out.solution(&problem.model)
        }
        Err(e) => {
            return MethodRun::failed(Method::Exact, clock.elapsed().as_secs_f64(), e.to_string())
        }
    };
    let elapsed = clock.elapsed().as_secs_f64();
    finish(inst, Method::Exact, sol, elapsed, Vec::new())
}

pub fn run_instance(
    inst: &Instance,
    name: &str,
    seed: u64,
    methods: &[Method],
    opts: &RunOptions,
    backend: &mut dyn MilpBackend,
) -> InstanceReport {
    let cfg = &opts.cfg;
    let mut report = InstanceReport {
        instance: name.to_string(),
        seed,
        lb: None,
        runs: Vec::new(),
        rfo: None,
        pr_traces: Vec::new(),
        ks_runs: Vec::new(),
    };
    let problem = match Problem::new(inst) {
        Ok(p) => p,
        Err(e) => {
            report.runs = methods
                .iter()
                .map(|&m| MethodRun::failed(m, 0.0, e.to_string()))
                .collect();
            return report;
        }
    };
    if opts.lower_bound {
        let out = backend.solve(&SolveRequest::new(&problem.model, cfg.time_limit_lb));
        report.lb = out.best_bound.is_finite().then_some(out.best_bound);
    }

    let rfo = if methods.iter().any(|m| m.needs_rfo()) {
        match run_rfo(&problem, cfg, backend) {
            Ok(r) => Some(r),
            Err(e) => {
                log::warn!("{name}: rfo failed: {e}");
                None
            }
        }
    } else {
        None
    };

    for &method in methods {
        let run = match (method, &rfo) {
            (Method::Exact, _) => run_exact(inst, &problem, cfg, backend),
            (_, None) => MethodRun::failed(method, 0.0, "relax-and-fix failed".into()),
            (Method::Rf, Some(r)) => finish(
                inst,
                method,
                r.rf.best.clone(),
                r.rf.timing.elapsed,
                vec![r.rf.timing.clone()],
            ),
            (Method::Fo, Some(r)) => match &r.fo {
                Some(fo) => finish(
                    inst,
                    method,
                    Some(fo.best.clone()),
                    fo.timing.elapsed,
                    vec![fo.timing.clone()],
                ),
                None => MethodRun::failed(method, 0.0, "no feasible start for FO".into()),
            },
            (Method::Rfo, Some(r)) => finish(
                inst,
                method,
                r.fo_best().cloned(),
                r.timing.elapsed,
                rfo_timings(r),
            ),
            (Method::RfoPr | Method::RfoPrStar, Some(r)) => {
                let mut c = cfg.clone();
                c.psi_empty = method == Method::RfoPrStar;
                let psi = psi_for(inst, &c);
                match run_rfo_pr(&problem, r, &c, &psi, backend) {
                    Ok(pr) => {
                        let mut timings = rfo_timings(r);
                        timings.push(pr.timing.clone());
                        report.pr_traces.push((method, pr.traces.clone()));
                        finish(
                            inst,
                            method,
                            pr.best,
                            r.timing.elapsed + pr.timing.elapsed,
                            timings,
                        )
                    }
                    Err(e) => MethodRun::failed(method, r.timing.elapsed, e.to_string()),
                }
            }
            (Method::RfoKs | Method::RfoKsStar, Some(r)) => {
                let mut c = cfg.clone();
                c.psi_empty = method == Method::RfoKsStar;
                let psi = psi_for(inst, &c);
                match (r.rf_best(), r.fo_best()) {
                    (Some(rf), Some(fo)) => {
                        let limit = c.time_limit_ks + r.spare();
                        match run_ks(&problem, rf, fo, &psi, limit, backend) {
                            Ok(ks) => {
                                let mut timings = rfo_timings(r);
                                timings.push(ks.timing.clone());
                                let time = r.timing.elapsed + ks.timing.elapsed;
                                let best = ks.best.clone();
                                report.ks_runs.push((method, ks));
                                finish(inst, method, Some(best), time, timings)
                            }
                            Err(e) => MethodRun::failed(method, r.timing.elapsed, e.to_string()),
                        }
                    }
                    _ => MethodRun::failed(
                        method,
                        r.timing.elapsed,
                        "no feasible solution found".into(),
                    ),
                }
            }
        };
        report.runs.push(run);
    }
    report.rfo = rfo;
    report
}

fn rfo_timings(r: &RfoRun) -> Vec<PhaseTiming> {
    let mut t = vec![r.rf.timing.clone()];
    if let Some(fo) = &r.fo {
        t.push(fo.timing.clone());
    }
    t.push(r.timing.clone());
    t
}
