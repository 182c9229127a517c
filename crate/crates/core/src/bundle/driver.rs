use std::time::Instant;

use super::formulas::{
    candidate_radius, constant_a, descent_test, growth_schedule_rho, model_shift,
    null_progress_test,
};
use super::model::{model_prox_gap, solve_prox_subproblem, Cut, CutKind, SolveResult, ThreeCutModel};
use crate::error::{Error, Result};
use crate::geometry::{GeometryConstants, Manifold, Point, Tangent};
use crate::problems::SubgradOracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleMode {
    /// Double rho until the descent test or the null-progress test passes.
    Backtracking,
    /// Keep rho fixed (it still doubles when the retraction fails).
    Constant,
    /// Set rho from the objective gap; needs `f_star`.
    Growth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    pub mode: ScheduleMode,
    /// Growth modulus.
    pub mu: f64,
    /// Growth exponent.
    pub p: f64,
    pub f_star: Option<f64>,
    /// Lipschitz bound of the objective.
    pub lip: f64,
    /// Overrides the constant `A` computed from the geometry.
    pub a_const: Option<f64>,
}

impl ScheduleParams {
    pub fn backtracking() -> Self {
        Self {
            mode: ScheduleMode::Backtracking,
            mu: 1.0,
            p: 1.0,
            f_star: None,
            lip: 1.0,
            a_const: None,
        }
    }

    pub fn constant() -> Self {
        Self {
            mode: ScheduleMode::Constant,
            ..Self::backtracking()
        }
    }

    pub fn growth(mu: f64, p: f64, f_star: f64, lip: f64) -> Self {
        Self {
            mode: ScheduleMode::Growth,
            mu,
            p,
            f_star: Some(f_star),
            lip,
            a_const: None,
        }
    }

    pub fn with_f_star(mut self, f_star: f64) -> Self {
        self.f_star = Some(f_star);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == ScheduleMode::Growth {
            if self.f_star.is_none() {
                return Err(Error::InvalidArgument("growth schedule needs f_star".into()));
            }
            if !(self.mu > 0.0 && self.p >= 1.0 && self.lip > 0.0) {
                return Err(Error::InvalidArgument(
                    "growth schedule needs mu > 0, p >= 1 and lip > 0".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BundleConfig {
    pub beta: f64,
    pub rho0: f64,
    pub schedule: ScheduleParams,
    /// Doublings allowed within one step before giving up.
    pub max_doublings: usize,
    /// Oracle call budget.
    pub budget: usize,
    /// Stop when the model proximal gap falls below `tol_stop (1 + |f_x|)`.
    pub tol_stop: f64,
    /// Stop when `f_x - f_star <= eps` (only when `f_star` is known).
    pub eps: f64,
}

impl Default for BundleConfig {
    fn default() -> Self {
        Self {
            beta: 0.1,
            rho0: 1.0,
            schedule: ScheduleParams::backtracking(),
            max_doublings: 200,
            budget: 10_000,
            tol_stop: 1e-10,
            eps: 0.0,
        }
    }
}

impl BundleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidArgument(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) {
            return Err(Error::InvalidArgument(format!("rho0 must be > 0, got {}", self.rho0)));
        }
        if !(self.tol_stop >= 0.0 && self.eps >= 0.0) {
            return Err(Error::InvalidArgument("tolerances must be >= 0".into()));
        }
        self.schedule.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepType {
    Descent,
    Null,
    /// Candidate rejected by both tests; rho was doubled.
    Backtrack,
}

impl StepType {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepType::Descent => "descent",
            StepType::Null => "null",
            StepType::Backtrack => "backtrack",
        }
    }
}

impl std::str::FromStr for StepType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "descent" => Ok(StepType::Descent),
            "null" => Ok(StepType::Null),
            "backtrack" => Ok(StepType::Backtrack),
            other => Err(Error::InvalidArgument(format!("unknown step type {other:?}"))),
        }
    }
}

/// One row per oracle call.
///
/// The first row of a run records the call at the starting point as a
/// descent with zero step. `g_norm` is the norm of the subgradient as it
/// enters the model: the transported one on null rows, the raw one
/// otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub oracle_calls: usize,
    pub wall_ns: u64,
    pub step_type: StepType,
    pub f_x: f64,
    pub f_z: f64,
    pub model_pred: f64,
    pub delta_tilde: f64,
    pub kappa: f64,
    pub rho: f64,
    pub d_norm: f64,
    pub g_norm: f64,
}

impl TraceRecord {
    /// Objective at the center once this row is processed.
    pub fn center_value(&self) -> f64 {
        match self.step_type {
            StepType::Descent => self.f_z,
            StepType::Null | StepType::Backtrack => self.f_x,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub oracle_calls: usize,
    pub descent_steps: usize,
    pub null_steps: usize,
    pub backtrack_doublings: usize,
}

#[derive(Debug, Clone)]
pub struct BundleState {
    pub center: Point,
    pub f_center: f64,
    pub anchor_grad: Tangent,
    pub model: ThreeCutModel,
    pub rho: f64,
    pub rho0: f64,
    pub beta: f64,
    pub constants: GeometryConstants,
    pub counters: Counters,
    pub iter: usize,
    started: Instant,
}

impl BundleState {
    /// Queries the oracle at `x0` and builds the anchor-only model there.
    pub fn init<M, O>(m: &M, oracle: &O, x0: Point, cfg: &BundleConfig) -> Result<(Self, TraceRecord)>
    where
        M: Manifold + ?Sized,
        O: SubgradOracle + ?Sized,
    {
        cfg.validate()?;
        m.check_point(&x0)?;
        let started = Instant::now();
        let (f0, g0) = oracle.eval(&x0)?;
        g0.ensure_base(&x0)?;
        let g_norm = m.norm(&g0)?;
        let model = ThreeCutModel::anchor(x0.clone(), f0, g0.clone())?;
        let state = Self {
            center: x0,
            f_center: f0,
            anchor_grad: g0,
            model,
            rho: cfg.rho0,
            rho0: cfg.rho0,
            beta: cfg.beta,
            constants: m.constants(),
            counters: Counters {
                oracle_calls: 1,
                ..Counters::default()
            },
            iter: 0,
            started,
        };
        let rec = TraceRecord {
            iter: 0,
            oracle_calls: 1,
            wall_ns: state.elapsed(),
            step_type: StepType::Descent,
            f_x: f0,
            f_z: f0,
            model_pred: f0,
            delta_tilde: 0.0,
            kappa: 0.0,
            rho: cfg.rho0,
            d_norm: 0.0,
            g_norm,
        };
        Ok((state, rec))
    }

    fn elapsed(&self) -> u64 {
        self.started.elapsed().as_nanos() as u64
    }

    pub fn anchor_grad_norm<M: Manifold + ?Sized>(&self, m: &M) -> Result<f64> {
        m.norm(&self.anchor_grad)
    }
}

/// Accepted candidate of one step.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub rho: f64,
    pub solve: SolveResult,
    pub delta_tilde: f64,
    pub z: Point,
    pub f_z: f64,
    pub g_z: Tangent,
    pub kappa: f64,
    pub descent: bool,
}

/// Result of the candidate search within one step.
// Built once per step, so boxing the candidate buys nothing.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum Proposal {
    Accepted(Candidate),
    /// The model proximal gap is below tolerance; no oracle call was made.
    Converged { delta_tilde: f64 },
    /// The oracle budget ran out during the search.
    OutOfBudget,
}

/// Candidate search with rho doubling.
///
/// In `Backtracking` mode rho doubles until the descent test or the
/// null-progress test holds; in the other modes the first candidate is
/// accepted. A retraction failure doubles rho in every mode. Rejected
/// candidates are appended to `rejected` as `Backtrack` rows.
pub fn backtrack_rho<M, O>(
    state: &mut BundleState,
    oracle: &O,
    m: &M,
    cfg: &BundleConfig,
    rejected: &mut Vec<TraceRecord>,
) -> Result<Proposal>
where
    M: Manifold + ?Sized,
    O: SubgradOracle + ?Sized,
{
    let accept_any = cfg.schedule.mode != ScheduleMode::Backtracking;
    let g_anchor = m.norm(&state.anchor_grad)?;
    let tol = cfg.tol_stop * (1.0 + state.f_center.abs());
    let mut doublings = 0usize;
    let mut first = true;
    loop {
        let solve = solve_prox_subproblem(&state.model, state.rho, m)?;
        let delta_tilde = model_prox_gap(state.f_center, &solve);
        if first && delta_tilde <= tol {
            return Ok(Proposal::Converged { delta_tilde });
        }
        first = false;

        let mut double = |state: &mut BundleState| -> Result<()> {
            if doublings >= cfg.max_doublings {
                return Err(Error::BudgetExhausted(doublings));
            }
            doublings += 1;
            state.rho *= 2.0;
            state.counters.backtrack_doublings += 1;
            Ok(())
        };

        let z = match m.retract(&solve.direction) {
            Ok(z) => z,
            Err(e) if e.is_retraction_failure() => {
                double(state)?;
                continue;
            }
            Err(e) => return Err(e),
        };
        if state.counters.oracle_calls >= cfg.budget {
            return Ok(Proposal::OutOfBudget);
        }
        let (f_z, g_z) = oracle.eval(&z)?;
        g_z.ensure_base(&z)?;
        state.counters.oracle_calls += 1;

        let g_norm = m.norm(&g_z)?;
        let radius = candidate_radius(g_anchor, state.rho, state.constants.c_r)?;
        let kappa = model_shift(g_norm, radius, &state.constants);
        let descent = descent_test(state.f_center, f_z, solve.model_value, state.beta);
        let progress = null_progress_test(delta_tilde, kappa, state.beta);
        if descent || progress || accept_any {
            return Ok(Proposal::Accepted(Candidate {
                rho: state.rho,
                solve,
                delta_tilde,
                z,
                f_z,
                g_z,
                kappa,
                descent,
            }));
        }
        rejected.push(TraceRecord {
            iter: state.iter + 1,
            oracle_calls: state.counters.oracle_calls,
            wall_ns: state.elapsed(),
            step_type: StepType::Backtrack,
            f_x: state.f_center,
            f_z,
            model_pred: solve.model_value,
            delta_tilde,
            kappa,
            rho: state.rho,
            d_norm: solve.d_norm(m)?,
            g_norm,
        });
        double(state)?;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Continue,
    /// Model proximal gap below tolerance.
    Converged,
    /// A zero subgradient was returned; the point is a minimizer.
    Optimal,
    OutOfBudget,
    /// `f_x - f_star <= eps`.
    GapReached,
    /// The per-step doubling cap was hit; carries the number of doublings.
    DoublingCap(usize),
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub records: Vec<TraceRecord>,
    pub status: StepStatus,
}

/// One iteration: pick rho, find a candidate, then either move the center
/// (descent) or refine the model (null step).
pub fn rpbm_step<M, O>(
    state: &mut BundleState,
    oracle: &O,
    m: &M,
    cfg: &BundleConfig,
) -> Result<StepOutcome>
where
    M: Manifold + ?Sized,
    O: SubgradOracle + ?Sized,
{
    let mut records = Vec::new();
    if let Some(f_star) = cfg.schedule.f_star {
        let gap = state.f_center - f_star;
        if gap <= cfg.eps {
            return Ok(StepOutcome {
                records,
                status: StepStatus::GapReached,
            });
        }
        if cfg.schedule.mode == ScheduleMode::Growth {
            let a = cfg.schedule.a_const.unwrap_or_else(|| {
                let c = state.constants;
                constant_a(c.k_min, c.c_r, c.c_t, cfg.schedule.lip, state.beta)
            });
            let target = growth_schedule_rho(gap, a, cfg.schedule.lip, cfg.schedule.mu, cfg.schedule.p)?;
            state.rho = state.rho.max(target);
        }
    }

    let proposal = match backtrack_rho(state, oracle, m, cfg, &mut records) {
        Ok(p) => p,
        Err(Error::BudgetExhausted(n)) => {
            return Ok(StepOutcome {
                records,
                status: StepStatus::DoublingCap(n),
            })
        }
        Err(e) => return Err(e),
    };
    let cand = match proposal {
        Proposal::Accepted(c) => c,
        Proposal::Converged { .. } => {
            return Ok(StepOutcome {
                records,
                status: StepStatus::Converged,
            })
        }
        Proposal::OutOfBudget => {
            return Ok(StepOutcome {
                records,
                status: StepStatus::OutOfBudget,
            })
        }
    };
    state.iter += 1;
    let d = &cand.solve.direction;
    let d_norm = m.norm(d)?;
    let f_x = state.f_center;
    let zero_grad = cand.g_z.is_zero();

    let (step_type, g_norm) = if cand.descent || (zero_grad && cand.f_z <= f_x) {
        let g_norm = m.norm(&cand.g_z)?;
        state.model = ThreeCutModel::anchor(cand.z.clone(), cand.f_z, cand.g_z.clone())?;
        state.center = cand.z;
        state.f_center = cand.f_z;
        state.anchor_grad = cand.g_z;
        state.counters.descent_steps += 1;
        (StepType::Descent, g_norm)
    } else {
        let g_hat = m.transporter(&cand.g_z, &state.center)?;
        let g_hat_norm = m.norm(&g_hat)?;
        let new_b = cand.f_z - m.inner(&g_hat, d)? - cand.kappa;
        let s = d.scaled(-cand.rho);
        let agg_b = cand.solve.model_value - m.inner(&s, d)?;
        let anchor = state.model.anchor_cut().clone();
        state.model = ThreeCutModel::from_cuts(
            state.center.clone(),
            vec![
                anchor,
                Cut::new(new_b, g_hat, CutKind::New),
                Cut::new(agg_b, s, CutKind::Aggregate),
            ],
        )?;
        state.counters.null_steps += 1;
        (StepType::Null, g_hat_norm)
    };
    records.push(TraceRecord {
        iter: state.iter,
        oracle_calls: state.counters.oracle_calls,
        wall_ns: state.elapsed(),
        step_type,
        f_x,
        f_z: cand.f_z,
        model_pred: cand.solve.model_value,
        delta_tilde: cand.delta_tilde,
        kappa: cand.kappa,
        rho: cand.rho,
        d_norm,
        g_norm,
    });
    let status = if zero_grad && step_type == StepType::Descent {
        StepStatus::Optimal
    } else {
        StepStatus::Continue
    };
    Ok(StepOutcome { records, status })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    Optimal,
    GapReached,
    Budget,
    /// The per-step doubling cap was hit.
    DoublingCap(usize),
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub x: Point,
    /// Objective at `x`; `None` when the budget allowed no oracle call.
    pub f: Option<f64>,
    pub trace: Vec<TraceRecord>,
    pub counters: Counters,
    pub rho: f64,
    pub stop: StopReason,
}

/// Runs steps until convergence, a known-gap target, a zero subgradient or
/// the oracle budget.
pub fn run<M, O>(m: &M, oracle: &O, x0: Point, cfg: &BundleConfig) -> Result<RunResult>
where
    M: Manifold + ?Sized,
    O: SubgradOracle + ?Sized,
{
    cfg.validate()?;
    if cfg.budget == 0 {
        m.check_point(&x0)?;
        return Ok(RunResult {
            x: x0,
            f: None,
            trace: Vec::new(),
            counters: Counters::default(),
            rho: cfg.rho0,
            stop: StopReason::Budget,
        });
    }
    let (mut state, first) = BundleState::init(m, oracle, x0, cfg)?;
    let mut trace = vec![first];
    let stop = if state.anchor_grad.is_zero() {
        StopReason::Optimal
    } else {
        loop {
            let out = rpbm_step(&mut state, oracle, m, cfg)?;
            trace.extend(out.records);
            match out.status {
                StepStatus::Continue => {}
                StepStatus::Converged => break StopReason::Converged,
                StepStatus::Optimal => break StopReason::Optimal,
                StepStatus::GapReached => break StopReason::GapReached,
                StepStatus::OutOfBudget => break StopReason::Budget,
                StepStatus::DoublingCap(n) => break StopReason::DoublingCap(n),
            }
            if state.counters.oracle_calls >= cfg.budget {
                break StopReason::Budget;
            }
        }
    };
    Ok(RunResult {
        x: state.center,
        f: Some(state.f_center),
        trace,
        counters: state.counters,
        rho: state.rho,
        stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Euclidean;
    use crate::hyperbolic::Hyperboloid;
    use crate::problems::{SharpOracle, WeightedL1};

    #[test]
    fn abs_value_first_step_is_descent() {
        let e = Euclidean::new(1).unwrap();
        let o = WeightedL1::new(&[1.0], &[0.0]).unwrap();
        let cfg = BundleConfig {
            beta: 0.1,
            rho0: 1.0,
            ..BundleConfig::default()
        };
        let (mut st, first) = BundleState::init(&e, &o, e.point(&[1.0]).unwrap(), &cfg).unwrap();
        assert_eq!(first.step_type, StepType::Descent);
        let out = rpbm_step(&mut st, &o, &e, &cfg).unwrap();
        let rec = out.records.last().unwrap();
        assert_eq!(rec.step_type, StepType::Descent);
        assert_eq!(rec.model_pred, 0.0);
        assert_eq!(rec.f_z, 0.0);
        assert_eq!(st.center.coords()[0], 0.0);
        assert_eq!(st.model.cuts().len(), 1);
        assert_eq!(out.status, StepStatus::Optimal);
    }

    #[test]
    fn null_step_keeps_center() {
        let e = Euclidean::new(1).unwrap();
        let o = WeightedL1::new(&[1.0], &[0.0]).unwrap();
        // rho small enough that the candidate overshoots to -9.
        let cfg = BundleConfig {
            rho0: 0.1,
            ..BundleConfig::default()
        };
        let (mut st, _) = BundleState::init(&e, &o, e.point(&[1.0]).unwrap(), &cfg).unwrap();
        let before = (st.center.clone(), st.f_center);
        let out = rpbm_step(&mut st, &o, &e, &cfg).unwrap();
        assert_eq!(out.records.last().unwrap().step_type, StepType::Null);
        assert_eq!((st.center.clone(), st.f_center), before);
        assert_eq!(st.model.cuts().len(), 3);
        assert_eq!(st.counters.backtrack_doublings, 0);
    }

    #[test]
    fn zero_budget_empty_trace() {
        let e = Euclidean::new(2).unwrap();
        let o = WeightedL1::new(&[1.0, 1.0], &[0.0, 0.0]).unwrap();
        let x0 = e.point(&[1.0, 1.0]).unwrap();
        let cfg = BundleConfig {
            budget: 0,
            ..BundleConfig::default()
        };
        let r = run(&e, &o, x0.clone(), &cfg).unwrap();
        assert_eq!(r.x, x0);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn doubling_cap_zero() {
        let h = Hyperboloid::new(2).unwrap();
        let o = SharpOracle::new(h.clone(), h.origin()).unwrap();
        let x0 = h.lift(&[3.0, 1.0]).unwrap();
        let cfg = BundleConfig {
            rho0: 1e-3,
            max_doublings: 0,
            ..BundleConfig::default()
        };
        let (mut st, _) = BundleState::init(&h, &o, x0, &cfg).unwrap();
        let mut rec = Vec::new();
        assert_eq!(
            backtrack_rho(&mut st, &o, &h, &cfg, &mut rec).unwrap_err(),
            Error::BudgetExhausted(0)
        );
    }

    #[test]
    fn hyperbolic_backtracking_terminates() {
        let h = Hyperboloid::new(2).unwrap();
        let o = SharpOracle::new(h.clone(), h.origin()).unwrap();
        let x0 = h.lift(&[3.0, 1.0]).unwrap();
        let cfg = BundleConfig {
            rho0: 1e-3,
            budget: 200,
            ..BundleConfig::default()
        };
        let r = run(&h, &o, x0, &cfg).unwrap();
        assert!(r.counters.backtrack_doublings > 0);
        assert!(r.f.unwrap() < r.trace[0].f_x);
        for w in r.trace.windows(2) {
            assert!(w[1].rho >= w[0].rho);
        }
    }

    #[test]
    fn validation() {
        let bad = BundleConfig {
            beta: 1.5,
            ..BundleConfig::default()
        };
        assert!(bad.validate().is_err());
        let growth = BundleConfig {
            schedule: ScheduleParams {
                f_star: None,
                ..ScheduleParams::growth(1.0, 1.0, 0.0, 1.0)
            },
            ..BundleConfig::default()
        };
        assert!(growth.validate().is_err());
    }
}
