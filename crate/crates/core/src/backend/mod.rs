//! Solver contract, adapter registry and the exhaustive oracle.

mod highs;
mod oracle;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{FixingLayer, MilpModel};
use crate::solution::Solution;

pub use highs::HighsBackend;
pub use oracle::{exact_oracle, solve_exact_oracle, OracleResult, ORACLE_MAX_CANDIDATES};

/// Environment variable naming the default adapter.
pub const BACKEND_ENV: &str = "NTLOT_BACKEND";

/// Wall-clock slack tolerated on top of a requested time limit.
pub const TIME_GRACE: f64 = 0.10;

#[derive(Debug, Clone, Copy)]
pub struct SolveRequest<'a> {
    pub model: &'a MilpModel,
    pub layer: Option<&'a FixingLayer>,
    /// Seconds.
    pub time_limit: f64,
    /// Model-ordered primal values offered as a starting incumbent.
    pub warm_start: Option<&'a [f64]>,
    pub relax_all: bool,
}

impl<'a> SolveRequest<'a> {
    pub fn new(model: &'a MilpModel, time_limit: f64) -> Self {
        SolveRequest {
            model,
            layer: None,
            time_limit,
            warm_start: None,
            relax_all: false,
        }
    }

    pub fn with_layer(mut self, layer: &'a FixingLayer) -> Self {
        self.layer = Some(layer);
        self
    }

    pub fn with_warm_start(mut self, values: &'a [f64]) -> Self {
        self.warm_start = Some(values);
        self
    }

    pub fn relaxed(mut self) -> Self {
        self.relax_all = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolveStatus {
    Optimal,
    FeasibleLimit,
    Infeasible,
    NoSolutionLimit,
    Error,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Model-ordered primal values; empty when no solution is available.
    pub values: Vec<f64>,
    pub objective: f64,
    pub best_bound: f64,
    /// Present only for pure LP solves.
    pub reduced_costs: Option<Vec<f64>>,
    /// Seconds.
    pub wall_time: f64,
    pub message: Option<String>,
}

impl SolveOutcome {
    pub fn failed(status: SolveStatus, wall_time: f64, message: Option<String>) -> Self {
        SolveOutcome {
            status,
            values: Vec::new(),
            objective: f64::INFINITY,
            best_bound: if status == SolveStatus::Infeasible {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
            reduced_costs: None,
            wall_time,
            message,
        }
    }

    pub fn has_solution(&self) -> bool {
        matches!(
            self.status,
            SolveStatus::Optimal | SolveStatus::FeasibleLimit
        ) && !self.values.is_empty()
    }

    pub fn solution(&self, model: &MilpModel) -> Option<Solution> {
        if !self.has_solution() {
            return None;
        }
        let mut sol = Solution::from_primal(model, &self.values);
        sol.feasible = true;
        Some(sol)
    }
}

pub trait MilpBackend: Send {
    fn name(&self) -> &str;

    /// Adapters used for kernel search must report LP reduced costs.
    fn reports_reduced_costs(&self) -> bool;

    fn solve(&mut self, req: &SolveRequest<'_>) -> SolveOutcome;

    fn solve_lp_relaxation(
        &mut self,
        model: &MilpModel,
        layer: Option<&FixingLayer>,
        time_limit: f64,
    ) -> SolveOutcome {
        let mut req = SolveRequest::new(model, time_limit).relaxed();
        req.layer = layer;
        self.solve(&req)
    }
}

type Factory = fn() -> Box<dyn MilpBackend>;

/// Named adapter factories.
pub struct BackendRegistry {
    factories: BTreeMap<String, Factory>,
}

impl Default for BackendRegistry {
    fn default() -> Self {
        let mut reg = BackendRegistry {
            factories: BTreeMap::new(),
        };
        reg.register("highs", || Box::new(HighsBackend::new()))
            .expect("built-in adapter reports reduced costs");
        reg
    }
}

impl BackendRegistry {
    /// Rejects adapters that cannot report reduced costs.
    pub fn register(&mut self, name: &str, factory: Factory) -> Result<()> {
        if !factory().reports_reduced_costs() {
            return Err(Error::Backend(format!(
                "adapter `{name}` does not report reduced costs"
            )));
        }
        self.factories.insert(name.to_string(), factory);
        Ok(())
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(|s| s.as_str()).collect()
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn MilpBackend>> {
        match self.factories.get(name) {
            Some(f) => Ok(f()),
            None => Err(Error::Backend(format!(
                "unknown backend `{name}` (set {BACKEND_ENV} or --backend to one of: {})",
                self.names().join(", ")
            ))),
        }
    }
}

/// Resolves `name`, else `$NTLOT_BACKEND`, else `highs`.
pub fn create_backend(name: Option<&str>) -> Result<Box<dyn MilpBackend>> {
    let env = std::env::var(BACKEND_ENV).ok();
    let chosen = name
        .map(str::to_string)
        .or(env)
        .unwrap_or_else(|| "highs".to_string());
    BackendRegistry::default().create(&chosen)
}
