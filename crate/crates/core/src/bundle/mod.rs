//! Proximal bundle method with a three-cut model.
//!
//! Each step solves `min_v model(v) + rho/2 |v|^2` on the tangent space at
//! the proximal center, retracts the minimizer to a candidate point and
//! queries the oracle there. A candidate that achieves a `beta` fraction of
//! the predicted decrease becomes the new center (descent step); otherwise
//! the transported cut, shifted down by `kappa`, refines the model (null
//! step).

mod driver;
mod formulas;
mod model;

pub use driver::{
    backtrack_rho, rpbm_step, run, BundleConfig, BundleState, Candidate, Counters, Proposal,
    RunResult, ScheduleMode, ScheduleParams, StepOutcome, StepStatus, StepType, StopReason,
    TraceRecord,
};
pub use formulas::{
    candidate_radius, constant_a, delta_swap, descent_test, growth_schedule_rho, model_shift,
    null_progress_test, prox_gap_lower_bound, recurrence_check, rho_tilde,
    transported_subgrad_bound,
};
pub use model::{
    model_prox_gap, solve_prox_subproblem, two_cut_theta, Cut, CutKind, SolveResult,
    ThreeCutModel,
};
