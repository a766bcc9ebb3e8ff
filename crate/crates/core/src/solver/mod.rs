//! Radial boundary-value solver for `Δu - (R/6) u + K u^p = 0`.

pub mod continuation;
pub mod kfamily;
pub mod shooting;
pub mod transform;

pub use continuation::{continuation_in_p, Continuation, ContinuationClass, ContinuationOptions, ContinuationReport};
pub use kfamily::{classify_wall, make_k_minus, KFamily, WallClass, WallLabel};
pub use shooting::{
    multi_start_count, ode_rhs, scan, shoot, solve_bvp, try_slope, CountResult, Problem, RadialSolution,
    ScanEvidence, Shot, ShotKind, SolutionSummary, SolveOutcome, SolverOptions,
};
pub use transform::{transform_identity_check, transform_n_to_2, transform_residuals, IdentityCheck, TransformReport};
