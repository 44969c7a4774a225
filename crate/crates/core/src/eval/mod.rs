//! Independent validation and benchmark metrics.

mod metrics;
mod records;
mod validate;

pub use metrics::{
    default_taus, gap_l, paired_t_test, performance_profile, ProfileCurve, TTest, Verdict,
};
pub use records::{emit_profiles, emit_results, read_results, BenchmarkRecord, RESULTS_HEADER};
pub use validate::{fill_flow, validate, Check, ValidationReport, Violation};
