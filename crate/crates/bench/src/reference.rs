//! Reference optimal values from long exact-primitive bundle runs, cached
//! on disk by instance hash.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rpbm::bundle::{run, BundleConfig, ScheduleParams, StopReason};
use rpbm::{Point, WithPrimitives};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};
use crate::experiment::Instance;

/// Relative stopping tolerance of reference runs.
pub const REFERENCE_TOL: f64 = 1e-12;

/// Budget multiplier of reference runs relative to the experiment budget.
pub const REFERENCE_BUDGET_FACTOR: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub f_star: f64,
    /// Best point found.
    pub x: Point,
    pub oracle_calls: usize,
    /// True when the value came from the cache.
    pub cached: bool,
    /// Set when the run stopped before meeting the tolerance.
    pub warning: Option<String>,
}

fn reference_config(cfg: &ExperimentConfig) -> BundleConfig {
    BundleConfig {
        beta: cfg.beta,
        rho0: cfg.rho0,
        schedule: ScheduleParams::backtracking(),
        max_doublings: cfg.max_doublings,
        budget: cfg.budget.max(1).saturating_mul(REFERENCE_BUDGET_FACTOR),
        tol_stop: REFERENCE_TOL,
        eps: 0.0,
    }
}

/// Hex SHA-256 of the instance and the reference run settings.
pub fn cache_key(cfg: &ExperimentConfig, inst: &Instance) -> String {
    let b = reference_config(cfg);
    let text = format!(
        "{}|beta={:e}|rho0={:e}|budget={}|tol={:e}|cap={}",
        inst.descriptor, b.beta, b.rho0, b.budget, b.tol_stop, b.max_doublings
    );
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.ref"))
}

fn encode(r: &Reference) -> String {
    let bits = |v: f64| format!("{:016x}", v.to_bits());
    let x: Vec<String> = r.x.coords().iter().map(|v| bits(*v)).collect();
    format!("f_star {}\ncalls {}\nx {}\n", bits(r.f_star), r.oracle_calls, x.join(" "))
}

fn decode(text: &str, like: &Point) -> Option<Reference> {
    let bits = |s: &str| u64::from_str_radix(s, 16).ok().map(f64::from_bits);
    let mut lines = text.lines();
    let f_star = bits(lines.next()?.strip_prefix("f_star ")?)?;
    let oracle_calls = lines.next()?.strip_prefix("calls ")?.parse().ok()?;
    let x: Option<Vec<f64>> = lines.next()?.strip_prefix("x ")?.split(' ').map(bits).collect();
    let x = x?;
    if x.len() != like.len() {
        return None;
    }
    Some(Reference {
        f_star,
        x: Point::new(like.id(), DVector::from_vec(x)),
        oracle_calls,
        cached: true,
        warning: None,
    })
}

/// Best objective value of a long bundle run with exact primitives and
/// parallel transport. A run that ends on its budget or doubling cap still
/// returns its best value, with a warning.
pub fn compute_reference(cfg: &ExperimentConfig, inst: &Instance, cache_dir: Option<&Path>) -> Result<Reference> {
    let key = cache_key(cfg, inst);
    if let Some(dir) = cache_dir {
        if let Ok(text) = std::fs::read_to_string(cache_path(dir, &key)) {
            if let Some(r) = decode(&text, &inst.x0) {
                return Ok(r);
            }
        }
    }
    let m = WithPrimitives::exact(inst.manifold.clone());
    let bcfg = reference_config(cfg);
    let r = run(&m, &inst.oracle, inst.x0.clone(), &bcfg)
        .map_err(|e| BenchError::run(format!("reference run for {}", cfg.experiment), e))?;
    let warning = match r.stop {
        StopReason::Budget => Some(format!(
            "reference run used its whole budget of {} calls",
            bcfg.budget
        )),
        StopReason::DoublingCap(n) => Some(format!("reference run stopped after {n} doublings")),
        _ => None,
    };
    let reference = Reference {
        f_star: r.f.unwrap_or(f64::INFINITY),
        x: r.x,
        oracle_calls: r.counters.oracle_calls,
        cached: false,
        warning,
    };
    if let Some(dir) = cache_dir {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
        let path = cache_path(dir, &key);
        std::fs::write(&path, encode(&reference)).map_err(|e| BenchError::io(&path, e))?;
    }
    Ok(reference)
}
