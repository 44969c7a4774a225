//! Integrated lot sizing and scheduling on parallel machines with
//! sequence-dependent, non-triangular setups.
//!
//! The crate is organised bottom-up:
//!
//! * [`instance`] holds the problem data and the derived defaults for the
//!   production bound `M` and the setup cap `q`.
//! * [`model`] builds the facility-location style MILP in a backend-neutral
//!   form and carries the [`model::FixingLayer`] used by every matheuristic.
//! * [`backend`] defines the solver contract, the HiGHS adapter and an
//!   exhaustive oracle for tiny instances.
//! * [`heuristics`] implements relax-and-fix, fix-and-optimize, their hybrid,
//!   path relinking and kernel search.
//! * [`generator`] creates the benchmark instance classes and reads/writes the
//!   on-disk format.
//! * [`eval`] validates solutions independently of any MILP machinery and
//!   computes gaps, performance profiles and paired t-tests.
//! * [`runner`] wires everything into per-instance method runs.

pub mod backend;
pub mod error;
pub mod eval;
pub mod generator;
pub mod heuristics;
pub mod instance;
pub mod model;
pub mod runner;
pub mod solution;

pub use backend::{
    create_backend, solve_exact_oracle, MilpBackend, SolveOutcome, SolveRequest, SolveStatus,
};
pub use error::{Error, Result};
pub use eval::{gap_l, paired_t_test, performance_profile, validate, BenchmarkRecord};
pub use generator::{generate, read_instance, write_instance, ClassSpec};
pub use heuristics::{HeuristicConfig, PartitionScheme};
pub use instance::Instance;
pub use model::{build_base_model, FixingLayer, MilpModel, VarId, VarKey};
pub use runner::Method;
pub use solution::{evaluate_objective, Solution};

/// Absolute tolerance used for feasibility checks and objective comparisons.
pub const TOL: f64 = 1e-6;
