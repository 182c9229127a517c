//! Riemannian subgradient method `x+ = R_x(-eta_i g)` with predetermined
//! step sizes.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point, RetractionKind};
use crate::problems::SubgradOracle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizeMode {
    /// `eta_i = c q^i`.
    Geometric { c: f64, q: f64 },
    /// `eta_i = (i + 1)^(-1/2)`.
    InverseSqrt,
}

impl StepsizeMode {
    pub fn eta(&self, iter: usize) -> f64 {
        match *self {
            StepsizeMode::Geometric { c, q } => c * q.powi(iter as i32),
            StepsizeMode::InverseSqrt => 1.0 / ((iter + 1) as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgmConfig {
    pub stepsize: StepsizeMode,
    /// Oracle call budget (one call per step).
    pub budget: usize,
    pub primitives: RetractionKind,
}

impl SgmConfig {
    pub fn validate(&self) -> Result<()> {
        if let StepsizeMode::Geometric { c, q } = self.stepsize {
            if !(c > 0.0 && q > 0.0 && q < 1.0) {
                return Err(Error::InvalidArgument(
                    "geometric step sizes need c > 0 and q in (0, 1)".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Halvings tried after a retraction failure before giving up.
pub const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone)]
pub struct SgmStep {
    pub next: Point,
    pub f_x: f64,
    pub g_norm: f64,
    /// Step size actually used (after any halvings).
    pub eta: f64,
}

/// One subgradient step from `x`.
pub fn sgm_step<M, O>(x: &Point, iter: usize, oracle: &O, m: &M, cfg: &SgmConfig) -> Result<SgmStep>
where
    M: Manifold + ?Sized,
    O: SubgradOracle + ?Sized,
{
    let (f_x, g) = oracle.eval(x)?;
    g.ensure_base(x)?;
    let g_norm = m.norm(&g)?;
    let mut eta = cfg.stepsize.eta(iter);
    if g.is_zero() {
        return Ok(SgmStep {
            next: x.clone(),
            f_x,
            g_norm,
            eta,
        });
    }
    for _ in 0..=MAX_HALVINGS {
        let v = g.scaled(-eta);
        let next = match cfg.primitives {
            RetractionKind::Exact => m.exp(&v),
            RetractionKind::FirstOrder => m.retract(&v),
        };
        match next {
            Ok(next) => {
                return Ok(SgmStep {
                    next,
                    f_x,
                    g_norm,
                    eta,
                })
            }
            Err(e) if e.is_retraction_failure() => eta *= 0.5,
            Err(e) => return Err(e),
        }
    }
    Err(Error::StepFailure)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgmRecord {
    pub iter: usize,
    pub oracle_calls: usize,
    pub wall_ns: u64,
    pub f_x: f64,
    pub f_best: f64,
    pub step_size: f64,
    pub g_norm: f64,
}

#[derive(Debug, Clone)]
pub struct SgmResult {
    pub best: Point,
    /// Best objective seen; `None` when the budget is 0.
    pub f_best: Option<f64>,
    pub last: Point,
    pub trace: Vec<SgmRecord>,
}

/// Runs `cfg.budget` steps and tracks the best iterate.
pub fn sgm_run<M, O>(m: &M, oracle: &O, x0: Point, cfg: &SgmConfig) -> Result<SgmResult>
where
    M: Manifold + ?Sized,
    O: SubgradOracle + ?Sized,
{
    cfg.validate()?;
    m.check_point(&x0)?;
    let started = Instant::now();
    let mut x = x0.clone();
    let mut best = x0;
    let mut f_best: Option<f64> = None;
    let mut trace = Vec::with_capacity(cfg.budget);
    for i in 0..cfg.budget {
        let step = sgm_step(&x, i, oracle, m, cfg)?;
        if f_best.is_none_or(|fb| step.f_x < fb) {
            f_best = Some(step.f_x);
            best = x.clone();
        }
        trace.push(SgmRecord {
            iter: i,
            oracle_calls: i + 1,
            wall_ns: started.elapsed().as_nanos() as u64,
            f_x: step.f_x,
            f_best: f_best.unwrap_or(step.f_x),
            step_size: step.eta,
            g_norm: step.g_norm,
        });
        if step.g_norm == 0.0 {
            break;
        }
        x = step.next;
    }
    Ok(SgmResult {
        best,
        f_best,
        last: x,
        trace,
    })
}
