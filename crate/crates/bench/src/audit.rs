//! Per-row and per-pair invariant checks over bundle traces.
//!
//! Checked on every trace:
//! - candidate radius: `d_norm <= 2 g_anchor / rho`, with `g_anchor` the
//!   subgradient norm recorded on the descent row that set the center;
//! - descent decrease: `f_z <= f_x - beta * delta_tilde` on descent rows;
//! - transported bound: `g_norm <= hbar L` on null rows;
//! - after a null row whose null-progress test held, the next row's
//!   `delta_tilde` does not increase and satisfies the null-step
//!   recurrence with the smallest rho used at that center;
//! - rho never decreases.

use std::fmt;
use std::path::Path;

use rpbm::bundle::{null_progress_test, recurrence_check, transported_subgrad_bound, StepType, TraceRecord};

use crate::error::{BenchError, Result};
use crate::trace::read_trace_csv;

/// Absolute slack of every comparison.
pub const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditParams {
    pub beta: f64,
    /// `hbar * L`, the bound on transported subgradients.
    pub hbar_lip: f64,
}

impl AuditParams {
    /// `hbar` from `rho0`, the Lipschitz bound and the error constants.
    pub fn new(beta: f64, rho0: f64, lip: f64, c_r: f64, c_t: f64) -> Self {
        Self {
            beta,
            hbar_lip: transported_subgrad_bound(rho0, lip, c_r, c_t) * lip,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckCount {
    pub checked: usize,
    pub failed: usize,
    /// Trace row index of the first failure.
    pub first_failure: Option<usize>,
}

impl CheckCount {
    fn record(&mut self, row: usize, ok: bool) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            self.first_failure.get_or_insert(row);
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub rows: usize,
    pub radius: CheckCount,
    pub descent: CheckCount,
    pub transported_bound: CheckCount,
    pub monotone: CheckCount,
    pub recurrence: CheckCount,
    pub rho_nondecreasing: CheckCount,
    pub warnings: Vec<String>,
}

impl AuditReport {
    pub fn checks(&self) -> [(&'static str, CheckCount); 6] {
        [
            ("candidate radius", self.radius),
            ("descent decrease", self.descent),
            ("transported subgradient bound", self.transported_bound),
            ("delta_tilde monotone", self.monotone),
            ("null-step recurrence", self.recurrence),
            ("rho nondecreasing", self.rho_nondecreasing),
        ]
    }

    pub fn failures(&self) -> usize {
        self.checks().iter().map(|(_, c)| c.failed).sum()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} rows", self.rows)?;
        for (name, c) in self.checks() {
            let verdict = if c.failed == 0 { "ok" } else { "FAIL" };
            write!(f, "{verdict:>4}  {name}: {}/{} passed", c.checked - c.failed, c.checked)?;
            if let Some(r) = c.first_failure {
                write!(f, " (first failure at row {r})")?;
            }
            writeln!(f)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

fn check_shape(records: &[TraceRecord]) -> Result<()> {
    let first = &records[0];
    if first.iter != 0 || first.step_type != StepType::Descent || first.d_norm != 0.0 {
        return Err(BenchError::MalformedTrace(
            "the first row must be the descent row at the starting point".into(),
        ));
    }
    for (i, w) in records.windows(2).enumerate() {
        if w[1].oracle_calls != w[0].oracle_calls + 1 {
            return Err(BenchError::MalformedTrace(format!(
                "row {}: oracle_calls must grow by one per row",
                i + 1
            )));
        }
        if w[1].iter < w[0].iter {
            return Err(BenchError::MalformedTrace(format!("row {}: iter decreased", i + 1)));
        }
    }
    for (i, r) in records.iter().enumerate() {
        let vals = [r.f_x, r.f_z, r.model_pred, r.delta_tilde, r.kappa, r.rho, r.d_norm, r.g_norm];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(BenchError::MalformedTrace(format!("row {i}: non-finite value")));
        }
        if !(r.rho > 0.0) {
            return Err(BenchError::MalformedTrace(format!("row {i}: rho must be > 0")));
        }
    }
    Ok(())
}

pub fn audit_trace(records: &[TraceRecord], params: &AuditParams) -> Result<AuditReport> {
    let mut rep = AuditReport {
        rows: records.len(),
        ..AuditReport::default()
    };
    if records.is_empty() {
        rep.warnings.push("empty trace: nothing to check".into());
        return Ok(rep);
    }
    check_shape(records)?;
    let beta = params.beta;
    let mut g_anchor = records[0].g_norm;
    let mut rho_anchor = f64::INFINITY;
    for i in 1..records.len() {
        let r = &records[i];
        let prev = &records[i - 1];
        if prev.step_type == StepType::Descent {
            rho_anchor = r.rho;
        }
        rho_anchor = rho_anchor.min(r.rho);
        rep.rho_nondecreasing.record(i, r.rho >= prev.rho);
        rep.radius.record(i, r.d_norm <= 2.0 * g_anchor / r.rho + AUDIT_TOL);
        match r.step_type {
            StepType::Descent => {
                rep.descent.record(i, r.f_z <= r.f_x - beta * r.delta_tilde + AUDIT_TOL);
                g_anchor = r.g_norm;
            }
            StepType::Null => {
                rep.transported_bound.record(i, r.g_norm <= params.hbar_lip + AUDIT_TOL);
            }
            StepType::Backtrack => {}
        }
        if prev.step_type == StepType::Null && i >= 2 && null_progress_test(prev.delta_tilde, prev.kappa, beta) {
            rep.monotone.record(i, r.delta_tilde <= prev.delta_tilde + AUDIT_TOL);
            rep.recurrence.record(
                i,
                recurrence_check(prev.delta_tilde, r.delta_tilde, prev.kappa, rho_anchor, beta, params.hbar_lip),
            );
        }
    }
    Ok(rep)
}

pub fn audit_csv(path: &Path, params: &AuditParams) -> Result<AuditReport> {
    audit_trace(&read_trace_csv(path)?, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rpbm::bundle::{run, BundleConfig};
    use rpbm::problems::WeightedL1;
    use rpbm::Euclidean;

    fn euclidean_trace() -> Vec<TraceRecord> {
        let e = Euclidean::new(4).unwrap();
        let o = WeightedL1::new(&[1.0, 2.0, 0.5, 1.5], &[0.3, -0.2, 1.0, 0.0]).unwrap();
        let cfg = BundleConfig {
            budget: 400,
            ..BundleConfig::default()
        };
        run(&e, &o, e.point(&[2.0, 2.0, 2.0, 2.0]).unwrap(), &cfg).unwrap().trace
    }

    fn params() -> AuditParams {
        AuditParams::new(0.1, 1.0, (1.0f64 + 4.0 + 0.25 + 2.25).sqrt(), 0.0, 0.0)
    }

    #[test]
    fn healthy_euclidean_trace_passes() {
        let t = euclidean_trace();
        let rep = audit_trace(&t, &params()).unwrap();
        assert!(rep.passed(), "{rep}");
        assert!(rep.recurrence.checked > 0 && rep.descent.checked > 0);
    }

    #[test]
    fn corrupted_delta_fails_recurrence() {
        let mut t = euclidean_trace();
        let i = (2..t.len())
            .find(|&i| t[i - 1].step_type == StepType::Null && null_progress_test(t[i - 1].delta_tilde, t[i - 1].kappa, 0.1))
            .expect("a checked pair");
        t[i].delta_tilde = t[i - 1].delta_tilde * 2.0 + 1.0;
        let rep = audit_trace(&t, &params()).unwrap();
        assert!(rep.recurrence.failed >= 1);
        assert!(!rep.passed());
    }

    #[test]
    fn empty_trace_is_vacuous() {
        let rep = audit_trace(&[], &params()).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.warnings.len(), 1);
    }

    #[test]
    fn gaps_in_oracle_calls_are_malformed() {
        let mut t = euclidean_trace();
        t[2].oracle_calls += 5;
        assert!(matches!(audit_trace(&t, &params()), Err(BenchError::MalformedTrace(_))));
    }
}
