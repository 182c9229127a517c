//! Builds problem instances from a config and runs an optimizer on them.

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rpbm::baselines::{sgm_run, SgmConfig, SgmRecord, StepsizeMode};
use rpbm::bundle::{run, BundleConfig, ScheduleParams, StopReason, TraceRecord};
use rpbm::geometry::estimate_primitive_constants;
use rpbm::problems::{gen_random_spd, DenoiseInstance, MedianOracle, SharpOracle, TvOracle, WeightedL1};
use rpbm::{Euclidean, Hyperboloid, Manifold, Point, RetractionKind, Spd, SubgradOracle, TransportKind, WithPrimitives};

use crate::config::{Algorithm, Experiment, ExperimentConfig, SgmSteps, Space, ToyKind};
use crate::error::{BenchError, Result};
use crate::plot::{render_svg, XAxis, YAxis};
use crate::reference::compute_reference;
use crate::trace::{write_sgm_csv, write_trace_csv};

/// A problem ready to be optimized.
pub struct Instance {
    pub manifold: Arc<dyn Manifold>,
    pub oracle: Box<dyn SubgradOracle + Send + Sync>,
    pub x0: Point,
    /// Base points for calibrating the primitive error constants.
    pub region: Vec<Point>,
    /// Text that identifies the instance (used for cache keys).
    pub descriptor: String,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance")
            .field("manifold", &self.manifold)
            .field("descriptor", &self.descriptor)
            .finish_non_exhaustive()
    }
}

fn ctx(cfg: &ExperimentConfig) -> impl Fn(rpbm::Error) -> BenchError + '_ {
    move |e| BenchError::run(format!("{} (seed {})", cfg.experiment, cfg.seed), e)
}

/// Generates the instance described by `cfg`. Deterministic given the seed.
pub fn build_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    let err = ctx(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let descriptor = format!(
        "{}|toy={:?}|space={:?}|dim={}|n={}|seed={}|spread={:e}|alpha={:e}|sigma={:e}",
        cfg.experiment, cfg.toy, cfg.space, cfg.dim, cfg.n_points, cfg.seed, cfg.spread, cfg.alpha, cfg.sigma
    );
    let inst = match cfg.experiment {
        Experiment::Median | Experiment::ConstantsEstimate if cfg.space == Space::Spd => {
            let spd = Spd::new(cfg.dim).map_err(&err)?;
            let data = gen_random_spd(cfg.dim, cfg.n_points, cfg.spread, cfg.seed).map_err(&err)?;
            let x0 = spd.identity();
            let mut region = data.clone();
            region.push(x0.clone());
            let oracle = MedianOracle::new(spd.clone(), data).map_err(&err)?;
            Instance {
                manifold: Arc::new(spd),
                oracle: Box::new(oracle),
                x0,
                region,
                descriptor,
            }
        }
        Experiment::Denoise => {
            let inst = DenoiseInstance::generate(cfg.n_points, cfg.alpha, cfg.sigma, cfg.seed).map_err(&err)?;
            let m = inst.manifold().map_err(&err)?;
            let oracle = TvOracle::new(&inst).map_err(&err)?;
            Instance {
                manifold: Arc::new(m),
                oracle: Box::new(oracle),
                x0: inst.noisy.clone(),
                region: vec![inst.noisy.clone(), inst.clean.clone()],
                descriptor,
            }
        }
        Experiment::Toy if cfg.toy == ToyKind::L1 => {
            let e = Euclidean::new(cfg.dim).map_err(&err)?;
            let w: Vec<f64> = (0..cfg.dim).map(|_| 1.0 + rng.random::<f64>()).collect();
            let c: Vec<f64> = (0..cfg.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let oracle = WeightedL1::new(&w, &c).map_err(&err)?;
            let x0 = e.point(&vec![0.0; cfg.dim]).map_err(&err)?;
            Instance {
                manifold: Arc::new(e),
                oracle: Box::new(oracle),
                region: vec![x0.clone()],
                x0,
                descriptor,
            }
        }
        Experiment::Toy | Experiment::ConstantsEstimate => sharp_instance(cfg, &mut rng, descriptor)?,
        Experiment::Median => unreachable!("validated: the median runs on spd"),
    };
    Ok(inst)
}

fn sharp_instance(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng, descriptor: String) -> Result<Instance> {
    let err = ctx(cfg);
    let d = cfg.dim;
    let (m, target): (Arc<dyn Manifold>, Point) = match cfg.space {
        Space::Euclidean => {
            let e = Euclidean::new(d).map_err(&err)?;
            let t: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let t = e.point(&t).map_err(&err)?;
            (Arc::new(e), t)
        }
        Space::Hyperbolic => {
            let h = Hyperboloid::new(d).map_err(&err)?;
            let t: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
            let t = h.lift(&t).map_err(&err)?;
            (Arc::new(h), t)
        }
        Space::Spd => {
            let spd = Spd::new(d).map_err(&err)?;
            let t = gen_random_spd(d, 1, cfg.spread, cfg.seed).map_err(&err)?.remove(0);
            (Arc::new(spd), t)
        }
        Space::HyperbolicProduct => {
            let h = rpbm::Product::new(Hyperboloid::new(2).map_err(&err)?, cfg.n_points).map_err(&err)?;
            let parts = (0..cfg.n_points)
                .map(|_| h.base().lift(&[rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)]))
                .collect::<rpbm::Result<Vec<_>>>()
                .map_err(&err)?;
            let t = h.join(&parts).map_err(&err)?;
            (Arc::new(h), t)
        }
    };
    // Start at distance 2 from the target along a random direction.
    let v = m.random_tangent(&target, rng).map_err(&err)?;
    let n = m.norm(&v).map_err(&err)?;
    let x0 = m.exp(&v.scaled(2.0 / n)).map_err(&err)?;
    let oracle = SharpOracle::new(m.clone(), target.clone()).map_err(&err)?;
    Ok(Instance {
        manifold: m,
        oracle: Box::new(oracle),
        region: vec![target, x0.clone()],
        x0,
        descriptor,
    })
}


/// Error constants the run was configured with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub c_r: f64,
    pub c_t: f64,
    /// Tangent step radius the estimate covered.
    pub radius: f64,
}

/// Wraps the instance geometry with the configured primitives. Inexact
/// primitives get their error constants estimated on the instance region
/// with steps up to `2 L / rho0`, the bound on every candidate step.
pub fn prepare(
    cfg: &ExperimentConfig,
    inst: &Instance,
) -> Result<(WithPrimitives<Arc<dyn Manifold>>, Calibration)> {
    prepare_with(cfg, inst, cfg.primitives, cfg.transport_kind())
}

fn prepare_with(
    cfg: &ExperimentConfig,
    inst: &Instance,
    retraction: RetractionKind,
    transport: TransportKind,
) -> Result<(WithPrimitives<Arc<dyn Manifold>>, Calibration)> {
    let err = ctx(cfg);
    let m = WithPrimitives::new(inst.manifold.clone(), retraction, transport);
    let radius = cfg
        .calib_radius
        .unwrap_or(2.0 * inst.oracle.lip_bound() / cfg.rho0);
    if retraction == RetractionKind::Exact && transport == TransportKind::Parallel {
        return Ok((m, Calibration { c_r: 0.0, c_t: 0.0, radius }));
    }
    let (c_r, c_t) = estimate_primitive_constants(&m, &inst.region, radius, cfg.calib_samples, cfg.seed)
        .map_err(&err)?;
    let m = m.with_error_constants(c_r, c_t).map_err(&err)?;
    let c = m.constants();
    Ok((m, Calibration { c_r: c.c_r, c_t: c.c_t, radius }))
}

/// Constants estimate for the `constants-estimate` experiment: first-order
/// retraction and projection transporter on the configured space.
pub fn estimate_constants(cfg: &ExperimentConfig) -> Result<Calibration> {
    let inst = build_instance(cfg)?;
    prepare_with(cfg, &inst, RetractionKind::FirstOrder, TransportKind::Projection).map(|(_, c)| c)
}

pub fn bundle_config(cfg: &ExperimentConfig, lip: f64) -> BundleConfig {
    let f_star = cfg.f_star.or(cfg.known_f_star());
    let schedule = ScheduleParams {
        mode: cfg.schedule,
        mu: cfg.mu,
        p: cfg.p,
        f_star,
        lip,
        a_const: None,
    };
    BundleConfig {
        beta: cfg.beta,
        rho0: cfg.rho0,
        schedule,
        max_doublings: cfg.max_doublings,
        budget: cfg.budget,
        tol_stop: cfg.tol,
        eps: cfg.eps,
    }
}

fn sgm_config(cfg: &ExperimentConfig) -> SgmConfig {
    SgmConfig {
        stepsize: match cfg.sgm {
            SgmSteps::Geometric { c, q } => StepsizeMode::Geometric { c, q },
            SgmSteps::InverseSqrt => StepsizeMode::InverseSqrt,
        },
        budget: cfg.budget,
        primitives: cfg.primitives,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunTrace {
    Bundle(Vec<TraceRecord>),
    Sgm(Vec<SgmRecord>),
}

impl RunTrace {
    pub fn len(&self) -> usize {
        match self {
            RunTrace::Bundle(t) => t.len(),
            RunTrace::Sgm(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Best objective value after the last row.
    pub fn final_value(&self) -> Option<f64> {
        match self {
            RunTrace::Bundle(t) => t.last().map(|r| r.center_value()),
            RunTrace::Sgm(t) => t.last().map(|r| r.f_best),
        }
    }

    pub fn csv(&self) -> String {
        match self {
            RunTrace::Bundle(t) => crate::trace::format_trace_csv(t),
            RunTrace::Sgm(t) => crate::trace::format_sgm_csv(t),
        }
    }
}

/// Headline numbers of a run. Everything except the calibration and the
/// stop reason can be recomputed from the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub f_star: f64,
    /// Last row's objective minus `f_star`; `None` for an empty trace.
    pub final_gap: Option<f64>,
    pub oracle_calls: usize,
    pub wall_ns: u64,
    /// Last row's rho (bundle runs only).
    pub final_rho: Option<f64>,
    pub doublings: usize,
    pub descent_steps: usize,
    pub null_steps: usize,
    pub stop: String,
    pub lip: f64,
    pub calibration: Calibration,
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let gap = self.final_gap.map_or("n/a".to_string(), |g| format!("{g:.6e}"));
        writeln!(f, "final gap      {gap}")?;
        writeln!(f, "f_star         {:.12e}", self.f_star)?;
        writeln!(f, "oracle calls   {}", self.oracle_calls)?;
        writeln!(f, "wall time      {:.3} ms", self.wall_ns as f64 * 1e-6)?;
        if let Some(rho) = self.final_rho {
            writeln!(f, "final rho      {rho:.6e}")?;
            writeln!(f, "doublings      {}", self.doublings)?;
            writeln!(f, "descent/null   {}/{}", self.descent_steps, self.null_steps)?;
        }
        writeln!(
            f,
            "c_r, c_t       {:.4e}, {:.4e}",
            self.calibration.c_r, self.calibration.c_t
        )?;
        write!(f, "stop           {}", self.stop)
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub trace: RunTrace,
    pub summary: Summary,
    /// Final center (bundle) or best iterate (SGM).
    pub x: Point,
}

fn stop_name(s: StopReason) -> String {
    match s {
        StopReason::Converged => "converged".into(),
        StopReason::Optimal => "optimal".into(),
        StopReason::GapReached => "gap reached".into(),
        StopReason::Budget => "budget".into(),
        StopReason::DoublingCap(n) => format!("doubling cap ({n})"),
    }
}

/// Runs the configured algorithm on `inst` and reports gaps against
/// `f_star`.
pub fn execute(cfg: &ExperimentConfig, inst: &Instance, f_star: f64) -> Result<Outcome> {
    let err = ctx(cfg);
    let (m, calibration) = prepare(cfg, inst)?;
    let lip = inst.oracle.lip_bound();
    let (trace, x, summary) = match cfg.algorithm {
        Algorithm::Rpb => {
            let bcfg = bundle_config(cfg, lip);
            let r = run(&m, &inst.oracle, inst.x0.clone(), &bcfg).map_err(&err)?;
            let last = r.trace.last();
            let summary = Summary {
                f_star,
                final_gap: last.map(|l| l.center_value() - f_star),
                oracle_calls: last.map_or(0, |l| l.oracle_calls),
                wall_ns: last.map_or(0, |l| l.wall_ns),
                final_rho: Some(last.map_or(cfg.rho0, |l| l.rho)),
                doublings: r.counters.backtrack_doublings,
                descent_steps: r.counters.descent_steps,
                null_steps: r.counters.null_steps,
                stop: stop_name(r.stop),
                lip,
                calibration,
            };
            (RunTrace::Bundle(r.trace), r.x, summary)
        }
        Algorithm::Sgm => {
            let r = sgm_run(&m, &inst.oracle, inst.x0.clone(), &sgm_config(cfg)).map_err(&err)?;
            let last = r.trace.last();
            let summary = Summary {
                f_star,
                final_gap: last.map(|l| l.f_best - f_star),
                oracle_calls: last.map_or(0, |l| l.oracle_calls),
                wall_ns: last.map_or(0, |l| l.wall_ns),
                final_rho: None,
                doublings: 0,
                descent_steps: 0,
                null_steps: 0,
                stop: "budget".into(),
                lip,
                calibration,
            };
            (RunTrace::Sgm(r.trace), r.best, summary)
        }
    };
    Ok(Outcome { trace, summary, x })
}

/// Files and numbers produced by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub trace_csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub summary: Summary,
    /// Diagnostics worth showing to the user (e.g. a truncated reference run).
    pub warnings: Vec<String>,
}

/// Builds the instance, finds `f_star` (config, known value or a cached
/// reference run), runs, and writes the requested files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    if cfg.experiment == Experiment::ConstantsEstimate {
        return Err(BenchError::Validation(vec![
            "constants-estimate does not produce a trace".into(),
        ]));
    }
    if cfg.plot.is_some() && cfg.out.is_none() {
        return Err(BenchError::Validation(vec!["--plot needs --out".into()]));
    }
    let inst = build_instance(cfg)?;
    let mut warnings = Vec::new();
    let f_star = match cfg.f_star.or(cfg.known_f_star()) {
        Some(f) => f,
        None => {
            let r = compute_reference(cfg, &inst, cfg.cache_dir.as_deref())?;
            warnings.extend(r.warning);
            r.f_star
        }
    };
    let out = execute(cfg, &inst, f_star)?;
    if let Some(path) = &cfg.out {
        match &out.trace {
            RunTrace::Bundle(t) => write_trace_csv(t, path)?,
            RunTrace::Sgm(t) => write_sgm_csv(t, path)?,
        }
    }
    if let (Some(plot), Some(csv)) = (&cfg.plot, &cfg.out) {
        let label = format!("{:?} {}", cfg.algorithm, crate::primitives_label(cfg)).to_lowercase();
        render_svg(&[(label, csv.clone())], YAxis::Gap, XAxis::OracleCalls, Some(f_star), plot)?;
    }
    Ok(RunArtifacts {
        trace_csv: cfg.out.clone(),
        plot: cfg.plot.clone(),
        summary: out.summary,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn flags(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn euclidean_toy_smoke() {
        let cfg = parse_config(Experiment::Toy, None, &flags(&[("budget", "300")])).unwrap();
        let inst = build_instance(&cfg).unwrap();
        let out = execute(&cfg, &inst, 0.0).unwrap();
        assert_eq!(out.summary.doublings, 0);
        let RunTrace::Bundle(t) = &out.trace else { panic!("bundle trace expected") };
        assert!(t.iter().all(|r| r.kappa == 0.0));
        assert_eq!(out.summary.final_gap, out.trace.final_value());
    }

    #[test]
    fn instances_are_seeded() {
        let a = parse_config(Experiment::Median, None, &flags(&[("dim", "3"), ("n_points", "4")])).unwrap();
        let b = parse_config(
            Experiment::Median,
            None,
            &flags(&[("dim", "3"), ("n_points", "4"), ("seed", "1")]),
        )
        .unwrap();
        let (ia, ia2, ib) = (build_instance(&a).unwrap(), build_instance(&a).unwrap(), build_instance(&b).unwrap());
        assert_eq!(ia.region, ia2.region);
        assert_ne!(ia.region, ib.region);
    }

    #[test]
    fn exact_primitives_skip_calibration() {
        let cfg = parse_config(Experiment::Median, None, &flags(&[("dim", "3")])).unwrap();
        let inst = build_instance(&cfg).unwrap();
        let (m, c) = prepare(&cfg, &inst).unwrap();
        assert_eq!((c.c_r, c.c_t), (0.0, 0.0));
        assert_eq!(m.constants().c_r, 0.0);
    }

    #[test]
    fn sgm_runs_full_budget() {
        let cfg = parse_config(Experiment::Toy, None, &flags(&[("algorithm", "sgm"), ("budget", "50")])).unwrap();
        let inst = build_instance(&cfg).unwrap();
        let out = execute(&cfg, &inst, 0.0).unwrap();
        assert_eq!(out.trace.len(), 50);
        assert!(out.summary.final_gap.unwrap() < inst.oracle.eval(&inst.x0).unwrap().0);
    }
}
