//! End-to-end behaviour of the bundle driver.

mod common;

use common::{point_near, rng, tangent_upto};
use rpbm::bundle::*;
use rpbm::geometry::estimate_primitive_constants;
use rpbm::problems::{MedianOracle, WeightedL1};
use rpbm::{Euclidean, Error, Hyperboloid, Manifold, Point, RetractionKind, Spd, SubgradOracle, TransportKind, WithPrimitives};

#[test]
fn absolute_value_solved_in_one_step() {
    let e = Euclidean::new(1).unwrap();
    let f = WeightedL1::new(&[1.0], &[0.0]).unwrap();
    let cfg = BundleConfig {
        beta: 0.1,
        rho0: 1.0,
        ..BundleConfig::default()
    };
    let r = run(&e, &f, e.point(&[1.0]).unwrap(), &cfg).unwrap();
    assert_eq!(r.stop, StopReason::Optimal);
    assert_eq!(r.x.coords()[0], 0.0);
    assert_eq!(r.trace.len(), 2);
    assert_eq!(r.trace[1].d_norm, 1.0);
}

fn strip_clock(t: &[TraceRecord]) -> Vec<TraceRecord> {
    t.iter().map(|r| TraceRecord { wall_ns: 0, ..*r }).collect()
}

fn hyperbolic_median(seed: u64) -> (Hyperboloid, MedianOracle<Hyperboloid>, Point) {
    let h = Hyperboloid::new(2).unwrap();
    let mut r = rng(seed);
    let data: Vec<Point> = (0..12).map(|_| point_near(&h, &h.origin(), 2.0, &mut r)).collect();
    let x0 = point_near(&h, &h.origin(), 3.0, &mut r);
    (h.clone(), MedianOracle::new(h, data).unwrap(), x0)
}

#[test]
fn runs_are_deterministic() {
    let (h, f, x0) = hyperbolic_median(1);
    let m = WithPrimitives::new(h, RetractionKind::FirstOrder, TransportKind::Projection);
    let cfg = BundleConfig {
        budget: 400,
        ..BundleConfig::default()
    };
    let a = run(&m, &f, x0.clone(), &cfg).unwrap();
    let b = run(&m, &f, x0, &cfg).unwrap();
    assert_eq!(strip_clock(&a.trace), strip_clock(&b.trace));
    assert_eq!(a.x, b.x);
}

#[test]
fn rho_never_decreases_and_centers_improve() {
    let (h, f, x0) = hyperbolic_median(2);
    let cfg = BundleConfig {
        budget: 500,
        rho0: 0.05,
        ..BundleConfig::default()
    };
    let r = run(&h, &f, x0, &cfg).unwrap();
    for w in r.trace.windows(2) {
        assert!(w[1].rho >= w[0].rho);
        assert!(w[1].center_value() <= w[0].center_value());
    }
}

#[test]
fn doubling_cap_of_zero_is_reported() {
    let (h, f, x0) = hyperbolic_median(3);
    let cfg = BundleConfig {
        rho0: 1e-4,
        max_doublings: 0,
        ..BundleConfig::default()
    };
    let (mut st, _) = BundleState::init(&h, &f, x0, &cfg).unwrap();
    let mut rows = Vec::new();
    assert_eq!(
        backtrack_rho(&mut st, &f, &h, &cfg, &mut rows).unwrap_err(),
        Error::BudgetExhausted(0)
    );
}

#[test]
fn spd_constants_calibrate_positive() {
    let spd = Spd::new(2).unwrap();
    let m = WithPrimitives::new(spd.clone(), RetractionKind::FirstOrder, TransportKind::Projection);
    let mut r = rng(4);
    let region: Vec<Point> = (0..5).map(|_| point_near(&spd, &spd.identity(), 1.0, &mut r)).collect();
    let (c_r, c_t) = estimate_primitive_constants(&m, &region, 1.0, 500, 1).unwrap();
    assert!(c_r > 0.0 && c_t > 0.0);
    let exact = WithPrimitives::exact(spd);
    assert_eq!(estimate_primitive_constants(&exact, &region, 1.0, 500, 1).unwrap(), (0.0, 0.0));
}

/// After every null step the model must stay below the objective on the
/// ball that contains the next candidates.
#[test]
fn null_step_models_are_local_minorants() {
    let (h, f, x0) = hyperbolic_median(5);
    let inexact = WithPrimitives::new(h.clone(), RetractionKind::FirstOrder, TransportKind::Projection);
    let (c_r, c_t) = estimate_primitive_constants(&inexact, &[x0.clone(), h.origin()], 2.0, 2000, 2).unwrap();
    let m = inexact.with_error_constants(c_r, c_t).unwrap();
    let cfg = BundleConfig {
        rho0: 0.5,
        budget: 300,
        ..BundleConfig::default()
    };
    let (mut st, _) = BundleState::init(&m, &f, x0, &cfg).unwrap();
    let mut r = rng(6);
    let mut null_checks = 0;
    for _ in 0..150 {
        let out = rpbm_step(&mut st, &f, &m, &cfg).unwrap();
        if out.records.last().map(|x| x.step_type) == Some(StepType::Null) {
            let radius = 2.0 * st.anchor_grad_norm(&m).unwrap() / st.rho;
            for _ in 0..50 {
                let v = tangent_upto(&m, &st.center, radius, &mut r);
                let model = st.model.eval(&m, &v).unwrap();
                let fv = f.eval(&m.exp(&v).unwrap()).unwrap().0;
                assert!(model <= fv + 1e-7, "model {model} above f {fv}");
            }
            null_checks += 1;
        }
        if out.status != StepStatus::Continue {
            break;
        }
    }
    assert!(null_checks > 0);
}

#[test]
fn subgradient_baseline_is_deterministic() {
    use rpbm::baselines::{sgm_run, SgmConfig, StepsizeMode};
    let (h, f, x0) = hyperbolic_median(7);
    let cfg = SgmConfig {
        stepsize: StepsizeMode::InverseSqrt,
        budget: 300,
        primitives: RetractionKind::FirstOrder,
    };
    let a = sgm_run(&h, &f, x0.clone(), &cfg).unwrap();
    let b = sgm_run(&h, &f, x0, &cfg).unwrap();
    let strip = |t: &[rpbm::baselines::SgmRecord]| t.iter().map(|r| (r.f_x, r.f_best, r.step_size)).collect::<Vec<_>>();
    assert_eq!(strip(&a.trace), strip(&b.trace));
    assert_eq!(a.best, b.best);
    assert!(a.f_best.unwrap() < a.trace[0].f_x);
}
