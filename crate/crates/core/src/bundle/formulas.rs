//! Closed-form constants, tests and schedules used by the bundle loop.

use crate::error::{Error, Result};
use crate::geometry::GeometryConstants;

/// Radius of the ball that contains every candidate point:
/// `2g/rho + c_r (2g/rho)^2`.
pub fn candidate_radius(g_norm: f64, rho: f64, c_r: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("rho must be > 0, got {rho}")));
    }
    let t = 2.0 * g_norm / rho;
    Ok(t + c_r * t * t)
}

/// Intercept shift `(2 sqrt(-k_min) + c_r + 2 c_t) |g| r^2` that keeps a
/// transported cut below the objective on the candidate ball.
pub fn model_shift(g_new_norm: f64, radius: f64, constants: &GeometryConstants) -> f64 {
    constants.shift_factor() * g_new_norm * radius * radius
}

/// `beta (f_x - model_pred) <= f_x - f_z`.
pub fn descent_test(f_x: f64, f_z: f64, model_pred: f64, beta: f64) -> bool {
    beta * (f_x - model_pred) <= f_x - f_z
}

/// `delta_tilde / 2 - kappa / (1 - beta) >= 0`.
pub fn null_progress_test(delta_tilde: f64, kappa: f64, beta: f64) -> bool {
    delta_tilde / 2.0 - kappa / (1.0 - beta) >= 0.0
}

/// Factor `1 + c_t (2L/rho0 + c_r (2L/rho0)^2)`; `hbar * L` bounds the norm
/// of every transported subgradient.
pub fn transported_subgrad_bound(rho0: f64, lip: f64, c_r: f64, c_t: f64) -> f64 {
    let t = 2.0 * lip / rho0;
    1.0 + c_t * (t + c_r * t * t)
}

/// `16 (2 sqrt(-k_min) + 2 c_t + c_r) (1 + c_r)^2 L^3 / (1 - beta)`.
pub fn constant_a(k_min: f64, c_r: f64, c_t: f64, lip: f64, beta: f64) -> f64 {
    let curv = 2.0 * (-k_min).max(0.0).sqrt();
    16.0 * (curv + 2.0 * c_t + c_r) * (1.0 + c_r).powi(2) * lip.powi(3) / (1.0 - beta)
}

/// Proximal parameter above which backtracking never needs to double.
pub fn rho_tilde(eps: f64, dist_bound: f64, a_const: f64, lip: f64) -> f64 {
    let a_half = a_const.sqrt();
    [
        (a_half * dist_bound / eps).powi(2),
        (a_half * lip.sqrt() * dist_bound / eps).powf(2.0 / 3.0),
        (a_const / eps).sqrt(),
        (a_const * lip / eps).powf(0.25),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Five-term schedule driven by the current objective gap `delta`.
pub fn growth_schedule_rho(delta: f64, a_const: f64, lip: f64, mu: f64, p: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "growth schedule needs a positive gap, got {delta}"
        )));
    }
    let mu2p = mu.powf(-2.0 / p);
    let terms = [
        a_const * mu2p * delta.powf((2.0 - 2.0 * p) / p),
        (a_const * lip * mu2p).cbrt() * delta.powf((2.0 - 2.0 * p) / (3.0 * p)),
        (a_const / delta).sqrt(),
        (a_const * lip / delta).powf(0.25),
        mu.powf(2.0 / p) * delta.powf((p - 2.0) / p),
    ];
    Ok(terms.into_iter().fold(0.0, f64::max))
}

/// Lower bound on the proximal gap at objective gap `delta` and distance
/// `dist_opt` to the solution set.
pub fn prox_gap_lower_bound(delta: f64, dist_opt: f64, rho: f64) -> f64 {
    if delta <= rho * dist_opt * dist_opt {
        (delta / dist_opt).powi(2) / (2.0 * rho)
    } else {
        delta - rho * dist_opt * dist_opt / 2.0
    }
}

/// Objective gap below which the last term of the growth schedule dominates.
pub fn delta_swap(a_const: f64, lip: f64, mu: f64, p: f64) -> f64 {
    const FOUR_THIRDS: f64 = 4.0 / 3.0;
    if (p - FOUR_THIRDS).abs() < 1e-12 {
        let lam = (a_const * mu.powf(-1.5)).max(a_const.sqrt()).max(mu.powf(1.5));
        let t1 = (lam / (a_const.cbrt() * lip.cbrt() * mu.powf(-0.5))).powi(3);
        let t2 = (lam / a_const.powf(0.25)).powi(4);
        t1.min(t2)
    } else if p < FOUR_THIRDS {
        let t1 = (a_const * lip / mu.powf(8.0 / p)).powf(p / (4.0 - 3.0 * p));
        let t2 = (a_const / mu.powf(8.0 / p)).powf(p / (8.0 - 5.0 * p));
        let t3 = (a_const / mu.powf(4.0 / p)).powf(p / (3.0 * p - 4.0));
        t1.min(t2).min(t3)
    } else {
        let t1 = (a_const * a_const / (lip * mu.powf(4.0 / p))).powf(p / (4.0 * (p - 1.0)));
        let t2 = (a_const.powi(3) / mu.powf(8.0 / p)).powf(p / (8.0 * p - 6.0));
        let t3 = (a_const / mu.powf(4.0 / p)).powf(p / (3.0 * p - 4.0));
        t1.min(t2).min(t3)
    }
}

/// Per-step decrease guaranteed for consecutive null steps at one center.
pub fn recurrence_check(
    delta_tilde_t: f64,
    delta_tilde_next: f64,
    kappa_next: f64,
    rho_anchor: f64,
    beta: f64,
    hbar_lip: f64,
) -> bool {
    let c = (1.0 - beta).powi(2) * rho_anchor / (8.0 * hbar_lip * hbar_lip);
    let excess = delta_tilde_t - kappa_next / (1.0 - beta);
    delta_tilde_next <= delta_tilde_t - c * excess * excess + 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn radius_examples() {
        assert!(close(candidate_radius(1.0, 2.0, 0.0).unwrap(), 1.0));
        assert_eq!(candidate_radius(0.0, 3.0, 5.0).unwrap(), 0.0);
        assert!(close(candidate_radius(1.0, 1.0, 1.0).unwrap(), 6.0));
        assert!(candidate_radius(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn shift_examples() {
        let flat = GeometryConstants::flat();
        assert_eq!(model_shift(3.0, 2.0, &flat), 0.0);
        let h = GeometryConstants::flat().with_k_min(-1.0);
        assert!(close(model_shift(1.0, 0.5, &h), 0.5));
        assert!(model_shift(1.0, 0.6, &h) > model_shift(1.0, 0.5, &h));
        assert!(model_shift(1.1, 0.5, &h) > model_shift(1.0, 0.5, &h));
    }

    #[test]
    fn descent_and_null_tests() {
        assert!(descent_test(10.0, 9.5, 8.0, 0.1));
        assert!(!descent_test(10.0, 10.0, 8.0, 0.1));
        assert!(descent_test(3.0, 2.0, 3.0, 0.7));
        assert!(null_progress_test(0.0, 0.0, 0.3));
        assert!(!null_progress_test(1.0, 0.4, 0.5));
        assert!(null_progress_test(1.0, 0.2, 0.5));
    }

    #[test]
    fn hbar_examples() {
        assert_eq!(transported_subgrad_bound(1.0, 5.0, 3.0, 0.0), 1.0);
        assert!(close(transported_subgrad_bound(2.0, 1.0, 0.0, 1.0), 2.0));
    }

    #[test]
    fn a_examples() {
        assert_eq!(constant_a(0.0, 0.0, 0.0, 3.0, 0.5), 0.0);
        assert!(close(constant_a(-1.0, 0.0, 0.0, 1.0, 0.5), 64.0));
        let a1 = constant_a(-1.0, 0.1, 0.2, 1.0, 0.3);
        let a2 = constant_a(-1.0, 0.1, 0.2, 2.0, 0.3);
        assert!(close(a2 / a1, 8.0));
    }

    #[test]
    fn rho_tilde_examples() {
        assert_eq!(rho_tilde(1e-3, 4.0, 0.0, 2.0), 0.0);
        assert!(close(rho_tilde(1.0, 1.0, 1.0, 1.0), 1.0));
        assert!(rho_tilde(1e-3, 1.0, 1.0, 1.0) > rho_tilde(1e-2, 1.0, 1.0, 1.0));
    }

    #[test]
    fn growth_examples() {
        assert!(close(growth_schedule_rho(4.0, 0.0, 1.0, 1.0, 2.0).unwrap(), 1.0));
        assert!(close(growth_schedule_rho(0.5, 0.0, 1.0, 1.0, 1.0).unwrap(), 2.0));
        assert!(growth_schedule_rho(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        let mut prev = 0.0;
        for k in 0..30 {
            let delta = 10f64.powf(1.0 - 0.3 * k as f64);
            let r = growth_schedule_rho(delta, 2.0, 1.0, 0.5, 1.5).unwrap();
            assert!(r >= prev);
            prev = r;
        }
    }

    #[test]
    fn prox_gap_branches() {
        assert!(close(prox_gap_lower_bound(2.0, 1.0, 2.0), 1.0));
        assert!(close(prox_gap_lower_bound(1.0, 1.0, 2.0), 0.25));
        assert!(close(prox_gap_lower_bound(4.0, 1.0, 2.0), 3.0));
    }

    #[test]
    fn delta_swap_examples() {
        assert!(close(delta_swap(1.0, 1.0, 1.0, 4.0 / 3.0), 1.0));
        // p = 1: min{A L / mu^8, (A / mu^8)^(1/3), (A / mu^4)^(-1)}
        assert!(close(delta_swap(1.0, 0.5, 1.0, 1.0), 0.5));
        assert!(close(delta_swap(8.0, 1.0, 1.0, 1.0), 0.125));
        for p in [1.0, 1.2, 4.0 / 3.0, 1.5, 2.0, 3.0] {
            assert!(delta_swap(2.0, 1.5, 0.7, p) > 0.0);
        }
    }

    #[test]
    fn recurrence_examples() {
        assert!(recurrence_check(0.0, 0.0, 0.0, 1.0, 0.5, 1.0));
        assert!(recurrence_check(1.0, 0.9, 0.0, 1.0, 0.5, 1.0));
        assert!(!recurrence_check(1.0, 1.5, 0.0, 1.0, 0.5, 1.0));
    }
}
