//! HiGHS adapter over the C API.

use std::ffi::{c_void, CString};
use std::os::raw::c_int;
use std::time::Instant;

use highs_sys::*;

use super::{MilpBackend, SolveOutcome, SolveRequest, SolveStatus};
use crate::model::LoweredModel;

/// Owned `Highs` handle.
struct Handle(*mut c_void);

impl Handle {
    fn new() -> Self {
        // SAFETY: Highs_create has no preconditions.
        let ptr = unsafe { Highs_create() };
        assert!(!ptr.is_null(), "Highs_create returned null");
        Handle(ptr)
    }

    fn set_bool(&self, name: &str, value: bool) {
        let key = CString::new(name).unwrap();
        // SAFETY: valid handle and NUL-terminated key.
        unsafe { Highs_setBoolOptionValue(self.0, key.as_ptr(), value as c_int) };
    }

    fn set_int(&self, name: &str, value: i32) {
        let key = CString::new(name).unwrap();
        // SAFETY: as above.
        unsafe { Highs_setIntOptionValue(self.0, key.as_ptr(), value) };
    }

    fn set_double(&self, name: &str, value: f64) {
        let key = CString::new(name).unwrap();
        // SAFETY: as above.
        unsafe { Highs_setDoubleOptionValue(self.0, key.as_ptr(), value) };
    }

    fn int_info(&self, name: &str) -> Option<i32> {
        let key = CString::new(name).unwrap();
        let mut v: HighsInt = 0;
        // SAFETY: as above; `v` outlives the call.
        let st = unsafe { Highs_getIntInfoValue(self.0, key.as_ptr(), &mut v) };
        (st == STATUS_OK).then_some(v)
    }

    fn double_info(&self, name: &str) -> Option<f64> {
        let key = CString::new(name).unwrap();
        let mut v = 0.0;
        // SAFETY: as above.
        let st = unsafe { Highs_getDoubleInfoValue(self.0, key.as_ptr(), &mut v) };
        (st == STATUS_OK).then_some(v)
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        // SAFETY: pointer came from Highs_create and is dropped once.
        unsafe { Highs_destroy(self.0) };
    }
}

// SAFETY: a handle is only ever used from the thread that owns the backend.
unsafe impl Send for Handle {}

/// Raw outcome of a single HiGHS run.
struct Run {
    model_status: HighsInt,
    has_primal: bool,
    values: Vec<f64>,
    duals: Vec<f64>,
    objective: f64,
    dual_bound: Option<f64>,
}

fn to_int(v: usize) -> HighsInt {
    HighsInt::try_from(v).expect("model too large for HighsInt")
}

fn run(
    lowered: &LoweredModel,
    integer: bool,
    time_limit: f64,
    warm: Option<&[f64]>,
) -> Result<Run, String> {
    let h = Handle::new();
    h.set_bool("output_flag", false);
    h.set_int("threads", 1);
    h.set_int("random_seed", 0);
    h.set_double("time_limit", time_limit.max(1e-3));
    h.set_double("mip_rel_gap", 0.0);
    h.set_double("mip_abs_gap", 1e-7);

    let ncol = lowered.num_cols();
    let nrow = lowered.num_rows();
    let start: Vec<HighsInt> = lowered.row_start[..nrow]
        .iter()
        .map(|&s| to_int(s))
        .collect();
    let index: Vec<HighsInt> = lowered.row_index.iter().map(|&s| to_int(s)).collect();
    let empty = [0 as HighsInt];
    let empty_value = [0.0f64];
    let start_ptr = if nrow == 0 {
        empty.as_ptr()
    } else {
        start.as_ptr()
    };
    let (index_ptr, value_ptr) = if index.is_empty() {
        (empty.as_ptr(), empty_value.as_ptr())
    } else {
        (index.as_ptr(), lowered.row_value.as_ptr())
    };

    let status = if integer {
        let integrality: Vec<HighsInt> =
            lowered.integer.iter().map(|&b| HighsInt::from(b)).collect();
        // SAFETY: every array has the length HiGHS derives from ncol/nrow/nnz.
        unsafe {
            Highs_passMip(
                h.0,
                to_int(ncol),
                to_int(nrow),
                to_int(index.len()),
                MATRIX_FORMAT_ROW_WISE,
                OBJECTIVE_SENSE_MINIMIZE,
                0.0,
                lowered.col_cost.as_ptr(),
                lowered.col_lower.as_ptr(),
                lowered.col_upper.as_ptr(),
                lowered.row_lower.as_ptr(),
                lowered.row_upper.as_ptr(),
                start_ptr,
                index_ptr,
                value_ptr,
                integrality.as_ptr(),
            )
        }
    } else {
        // SAFETY: as above.
        unsafe {
            Highs_passLp(
                h.0,
                to_int(ncol),
                to_int(nrow),
                to_int(index.len()),
                MATRIX_FORMAT_ROW_WISE,
                OBJECTIVE_SENSE_MINIMIZE,
                0.0,
                lowered.col_cost.as_ptr(),
                lowered.col_lower.as_ptr(),
                lowered.col_upper.as_ptr(),
                lowered.row_lower.as_ptr(),
                lowered.row_upper.as_ptr(),
                start_ptr,
                index_ptr,
                value_ptr,
            )
        }
    };
    if status == STATUS_ERROR {
        return Err("HiGHS rejected the model".into());
    }
    if let Some(w) = warm {
        if w.len() == ncol {
            // SAFETY: `w` has ncol entries; row values may be null.
            unsafe {
                Highs_setSolution(
                    h.0,
                    w.as_ptr(),
                    std::ptr::null(),
                    std::ptr::null(),
                    std::ptr::null(),
                )
            };
        }
    }
    // SAFETY: model passed above.
    let st = unsafe { Highs_run(h.0) };
    if st == STATUS_ERROR {
        return Err("HiGHS run failed".into());
    }
    // SAFETY: valid handle.
    let model_status = unsafe { Highs_getModelStatus(h.0) };
    let has_primal = h.int_info("primal_solution_status") == Some(SOLUTION_STATUS_FEASIBLE);
    let mut values = vec![0.0; ncol];
    let mut duals = vec![0.0; ncol];
    let mut row_value = vec![0.0; nrow.max(1)];
    let mut row_dual = vec![0.0; nrow.max(1)];
    if has_primal {
        // SAFETY: buffers sized ncol / nrow.
        unsafe {
            Highs_getSolution(
                h.0,
                values.as_mut_ptr(),
                duals.as_mut_ptr(),
                row_value.as_mut_ptr(),
                row_dual.as_mut_ptr(),
            )
        };
    }
    // SAFETY: valid handle.
    let objective = unsafe { Highs_getObjectiveValue(h.0) };
    let dual_bound = if integer {
        h.double_info("mip_dual_bound")
    } else {
        None
    };
    Ok(Run {
        model_status,
        has_primal,
        values,
        duals,
        objective,
        dual_bound,
    })
}

fn objective_of(lowered: &LoweredModel, values: &[f64]) -> f64 {
    lowered
        .col_cost
        .iter()
        .zip(values)
        .map(|(c, v)| c * v)
        .sum()
}

/// Re-solves the continuous part with integer columns pinned to their
/// rounded values, which removes big-M leakage from integrality tolerances.
#[allow(clippy::needless_range_loop)]
fn polish(lowered: &LoweredModel, values: &[f64], time_limit: f64) -> Option<Vec<f64>> {
    let mut fixed = lowered.clone();
    let mut any_continuous = false;
    for c in 0..fixed.num_cols() {
        if fixed.integer[c] {
            let r = values[c]
                .round()
                .clamp(fixed.col_lower[c], fixed.col_upper[c]);
            fixed.col_lower[c] = r;
            fixed.col_upper[c] = r;
            fixed.integer[c] = false;
        } else {
            any_continuous = true;
        }
    }
    if !any_continuous {
        return Some(fixed.col_lower.clone());
    }
    let out = run(&fixed, false, time_limit, None).ok()?;
    (out.model_status == MODEL_STATUS_OPTIMAL && out.has_primal).then_some(out.values)
}

#[derive(Debug, Default)]
pub struct HighsBackend;

impl HighsBackend {
    pub fn new() -> Self {
        HighsBackend
    }
}

impl MilpBackend for HighsBackend {
    fn name(&self) -> &str {
        "highs"
    }

    fn reports_reduced_costs(&self) -> bool {
        true
    }

    fn solve(&mut self, req: &SolveRequest<'_>) -> SolveOutcome {
        let clock = Instant::now();
        if req.time_limit.is_nan() || req.time_limit <= 0.0 {
            return SolveOutcome::failed(
                SolveStatus::Error,
                0.0,
                Some(format!(
                    "time limit must be positive, got {}",
                    req.time_limit
                )),
            );
        }
        let lowered = match req.model.lower(req.layer, req.relax_all) {
            Ok(l) => l,
            Err(e) => return SolveOutcome::failed(SolveStatus::Error, 0.0, Some(e.to_string())),
        };
        if lowered.num_cols() == 0 {
            return SolveOutcome {
                status: SolveStatus::Optimal,
                values: Vec::new(),
                objective: 0.0,
                best_bound: 0.0,
                reduced_costs: req.relax_all.then(Vec::new),
                wall_time: clock.elapsed().as_secs_f64(),
                message: None,
            };
        }
        let integer = lowered.has_integers();
        let out = match run(&lowered, integer, req.time_limit, req.warm_start) {
            Ok(o) => o,
            Err(msg) => {
                return SolveOutcome::failed(
                    SolveStatus::Error,
                    clock.elapsed().as_secs_f64(),
                    Some(msg),
                )
            }
        };
        let status = match out.model_status {
            MODEL_STATUS_OPTIMAL if out.has_primal => SolveStatus::Optimal,
            MODEL_STATUS_MODEL_EMPTY => SolveStatus::Optimal,
            MODEL_STATUS_INFEASIBLE | MODEL_STATUS_UNBOUNDED_OR_INFEASIBLE => {
                SolveStatus::Infeasible
            }
            MODEL_STATUS_REACHED_TIME_LIMIT
            | MODEL_STATUS_REACHED_ITERATION_LIMIT
            | MODEL_STATUS_REACHED_SOLUTION_LIMIT
            | MODEL_STATUS_REACHED_INTERRUPT
            | MODEL_STATUS_REACHED_MEMORY_LIMIT
            | MODEL_STATUS_OBJECTIVE_BOUND
            | MODEL_STATUS_OBJECTIVE_TARGET => {
                if out.has_primal {
                    SolveStatus::FeasibleLimit
                } else {
                    SolveStatus::NoSolutionLimit
                }
            }
            other => {
                return SolveOutcome::failed(
                    SolveStatus::Error,
                    clock.elapsed().as_secs_f64(),
                    Some(format!("HiGHS model status {other}")),
                )
            }
        };
        if status == SolveStatus::Infeasible {
            return SolveOutcome::failed(status, clock.elapsed().as_secs_f64(), None);
        }
        if !out.has_primal && out.model_status != MODEL_STATUS_MODEL_EMPTY {
            let mut o = SolveOutcome::failed(status, clock.elapsed().as_secs_f64(), None);
            if let Some(b) = out.dual_bound.filter(|b| b.is_finite()) {
                o.best_bound = b;
            }
            return o;
        }

        let mut values = out.values;
        if integer {
            let remaining = (req.time_limit - clock.elapsed().as_secs_f64()).max(1.0);
            if let Some(p) = polish(&lowered, &values, remaining) {
                values = p;
            }
        }
        let objective = if integer {
            objective_of(&lowered, &values)
        } else {
            out.objective
        };
        let bound = if integer {
            out.dual_bound
                .filter(|b| b.is_finite())
                .unwrap_or(f64::NEG_INFINITY)
        } else {
            objective
        };
        let best_bound = bound.min(objective);
        let reduced_costs = (!integer).then_some(out.duals);
        SolveOutcome {
            status,
            values,
            objective,
            best_bound,
            reduced_costs,
            wall_time: clock.elapsed().as_secs_f64(),
            message: None,
        }
    }
}
