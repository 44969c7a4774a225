use super::{solve_layer, HeuristicConfig, PartitionScheme, PhaseTiming, Problem, TimeBudget};
use crate::backend::MilpBackend;
use crate::error::{Error, Result};
use crate::model::{FixingLayer, MilpModel};
use crate::solution::Solution;
use crate::TOL;

/// FO layer at iteration `v`. By default `y` inside the window is free and
/// `y` outside is fixed to the incumbent; `literal` swaps the two sides.
pub fn build_fo_subproblem(
    model: &MilpModel,
    scheme: &PartitionScheme,
    v: usize,
    incumbent: &Solution,
    literal: bool,
) -> FixingLayer {
    let (start, end) = scheme.interval(v);
    let mut layer = FixingLayer::new();
    for (id, (i, j, k, t)) in model.y_vars() {
        let inside = (start..=end).contains(&(t + 1));
        if inside == literal {
            let var = model.var(id);
            let value = incumbent
                .y_at(i, j, k, t)
                .round()
                .clamp(var.lower, var.upper);
            layer.fix(id, value);
        }
    }
    layer
}

#[derive(Debug, Clone)]
pub struct FoRun {
    pub best: Solution,
    pub start_objective: f64,
    /// Incumbent objective after every subproblem.
    pub history: Vec<f64>,
    pub solves: usize,
    pub cycles: usize,
    pub timing: PhaseTiming,
}

/// Cycles over the windows until a full cycle brings no strict
/// improvement or `limit` seconds have passed.
pub fn run_fo(
    problem: &Problem<'_>,
    start: &Solution,
    cfg: &HeuristicConfig,
    limit: f64,
    backend: &mut dyn MilpBackend,
) -> Result<FoRun> {
    if !start.feasible {
        return Err(Error::InvalidArgument(
            "fix-and-optimize needs a feasible start".into(),
        ));
    }
    let model = &problem.model;
    let budget = TimeBudget::new(limit);
    let scheme = PartitionScheme::for_heuristic(model.p, cfg.lambda_fo, cfg.gamma_fo)?;
    let theta = scheme.theta;
    let mut incumbent = start.clone();
    let mut history = Vec::new();
    let mut solves = 0;
    let mut cycles = 0;

    'cycles: loop {
        cycles += 1;
        let mut improved = false;
        for v in 1..=theta {
            if budget.exhausted() {
                break 'cycles;
            }
            let layer = build_fo_subproblem(model, &scheme, v, &incumbent, cfg.fo_literal);
            let warm = incumbent.to_primal(model);
            let out = solve_layer(
                backend,
                model,
                &layer,
                budget.share(theta - v + 1),
                Some(&warm),
            );
            solves += 1;
            if let Some(sol) = out.solution(model) {
                if sol.objective < incumbent.objective - TOL {
                    incumbent = sol;
                    improved = true;
                }
            }
            history.push(incumbent.objective);
        }
        if !improved {
            break;
        }
    }
    Ok(FoRun {
        best: incumbent,
        start_objective: start.objective,
        history,
        solves,
        cycles,
        timing: budget.timing("fo"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::SolveRequest;
    use crate::eval::validate;
    use crate::heuristics::{plan_partition, testkit};
    use crate::model::{build_base_model, VarKey};

    #[test]
    fn whole_horizon_window_fixes_nothing() {
        let inst = testkit::small(2, 1, 3);
        let model = build_base_model(&inst).unwrap();
        let scheme = PartitionScheme::for_heuristic(3, 4, 2).unwrap();
        let sol = Solution::for_instance(&inst);
        assert!(build_fo_subproblem(&model, &scheme, 1, &sol, false).is_empty());
        assert_eq!(
            build_fo_subproblem(&model, &scheme, 1, &sol, true)
                .fixed
                .len(),
            model.count_symbol("y")
        );
    }

    #[test]
    fn window_sides() {
        let inst = testkit::small(2, 1, 6);
        let model = build_base_model(&inst).unwrap();
        let scheme = plan_partition(6, 4, 2).unwrap();
        let sol = Solution::for_instance(&inst);
        let (a, b) = scheme.interval(2);
        let layer = build_fo_subproblem(&model, &scheme, 2, &sol, false);
        let literal = build_fo_subproblem(&model, &scheme, 2, &sol, true);
        assert!(!layer.fixed.is_empty() && !literal.fixed.is_empty());
        for &id in layer.fixed.keys() {
            let VarKey::Y { t, .. } = model.var(id).key else {
                panic!()
            };
            assert!(!(a..=b).contains(&(t + 1)));
        }
        for &id in literal.fixed.keys() {
            let VarKey::Y { t, .. } = model.var(id).key else {
                panic!()
            };
            assert!((a..=b).contains(&(t + 1)));
        }
    }

    #[test]
    fn never_worse_than_start() {
        let inst = testkit::small(2, 1, 4);
        let problem = Problem::new(&inst).unwrap();
        let mut backend = testkit::highs();
        let opt = backend
            .solve(&SolveRequest::new(&problem.model, 60.0))
            .objective;
        let rf = super::super::run_rf(&problem, &testkit::cfg(30.0), &mut backend).unwrap();
        let start = rf.best.unwrap();
        let mut cfg = testkit::cfg(30.0);
        cfg.lambda_fo = 2;
        cfg.gamma_fo = 1;
        let run = run_fo(&problem, &start, &cfg, 30.0, &mut backend).unwrap();
        assert!(run.best.objective <= start.objective + 1e-9);
        assert!(run.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(run.best.objective >= opt - 1e-6);
        assert!(validate(&inst, &run.best).feasible);
    }

    #[test]
    fn rejects_infeasible_start() {
        let inst = testkit::zero_toy();
        let problem = Problem::new(&inst).unwrap();
        let start = Solution::for_instance(&inst);
        assert!(run_fo(
            &problem,
            &start,
            &testkit::cfg(1.0),
            1.0,
            &mut testkit::highs()
        )
        .is_err());
    }
}
