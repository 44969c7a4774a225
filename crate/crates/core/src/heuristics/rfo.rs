use super::{run_fo, run_rf, FoRun, HeuristicConfig, PhaseTiming, Problem, RfRun, TimeBudget};
use crate::backend::MilpBackend;
use crate::error::Result;
use crate::solution::Solution;

/// RF followed by FO from RF's result; FO inherits RF's unused time.
#[derive(Debug, Clone)]
pub struct RfoRun {
    pub rf: RfRun,
    /// `None` when RF found nothing feasible.
    pub fo: Option<FoRun>,
    pub timing: PhaseTiming,
}

impl RfoRun {
    pub fn snapshot(&self) -> Option<&Solution> {
        self.rf.snapshot.as_ref()
    }

    pub fn rf_best(&self) -> Option<&Solution> {
        self.rf.best.as_ref()
    }

    pub fn fo_best(&self) -> Option<&Solution> {
        self.fo.as_ref().map(|f| &f.best)
    }

    pub fn found_feasible(&self) -> bool {
        self.fo.is_some()
    }

    /// Unused part of the combined RF and FO budget.
    pub fn spare(&self) -> f64 {
        self.timing.spare()
    }
}

pub fn run_rfo(
    problem: &Problem<'_>,
    cfg: &HeuristicConfig,
    backend: &mut dyn MilpBackend,
) -> Result<RfoRun> {
    let clock = TimeBudget::new(cfg.time_limit_rf + cfg.time_limit_fo);
    let rf = run_rf(problem, cfg, backend)?;
    let fo_limit = cfg.time_limit_fo + rf.timing.spare();
    let fo = match &rf.best {
        Some(start) => Some(run_fo(problem, start, cfg, fo_limit, backend)?),
        None => None,
    };
    Ok(RfoRun {
        rf,
        fo,
        timing: clock.timing("rfo"),
    })
}
