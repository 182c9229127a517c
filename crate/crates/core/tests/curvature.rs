//! Curvature-driven bounds that make transported cuts safe.

mod common;

use common::{point_near, rng, tangent_upto};
use rand::Rng;
use rpbm::bundle::model_shift;
use rpbm::geometry::contract::random_tangent_of_len;
use rpbm::geometry::estimate_primitive_constants;
use rpbm::problems::SharpOracle;
use rpbm::{Hyperboloid, Manifold, Point, RetractionKind, Spd, SubgradOracle, TransportKind, WithPrimitives};

/// `|<G g, G log_z y - (log_x y - log_x z)>|` with `G` parallel transport
/// from `z` to `x`.
fn transported_log_defect(m: &dyn Manifold, x: &Point, y: &Point, z: &Point, g: &rpbm::Tangent) -> f64 {
    let gg = m.parallel_transport(g, x).unwrap();
    let lzy = m.parallel_transport(&m.log(z, y).unwrap(), x).unwrap();
    let diff = m.log(x, y).unwrap().sub(&m.log(x, z).unwrap()).unwrap();
    m.inner(&gg, &lzy.sub(&diff).unwrap()).unwrap().abs()
}

#[test]
fn transported_log_defect_is_quadratic_in_radius() {
    let h = Hyperboloid::new(2).unwrap();
    let k = h.constants().k_min;
    let mut r = rng(1);
    for alpha in [0.25, 0.5, 1.0] {
        for _ in 0..400 {
            let x = point_near(&h, &h.origin(), 2.0, &mut r);
            let y = h.exp(&tangent_upto(&h, &x, alpha, &mut r)).unwrap();
            let z = h.exp(&tangent_upto(&h, &x, alpha, &mut r)).unwrap();
            let g = tangent_upto(&h, &z, 3.0, &mut r);
            let lhs = transported_log_defect(&h, &x, &y, &z, &g);
            let bound = 2.0 * (-k).sqrt() * h.norm(&g).unwrap() * alpha * alpha;
            assert!(lhs <= bound + 1e-12, "alpha {alpha}: {lhs:e} > {bound:e}");
        }
    }
}

/// Samples `z = R_x(v_z)` and `v`, both within `alpha` of `x`, and checks
/// that the shifted transported cut from `z` stays below `f(exp_x v)`.
fn check_shift<M: Manifold + Clone + 'static>(raw: M, center: Point, seed: u64) {
    let mut r = rng(seed);
    let target = point_near(&raw, &center, 1.0, &mut r);
    let f = SharpOracle::new(raw.clone(), target).unwrap();
    for alpha in [0.25, 0.5, 1.0] {
        let inexact = WithPrimitives::new(raw.clone(), RetractionKind::FirstOrder, TransportKind::Projection);
        let region: Vec<Point> = (0..6).map(|_| point_near(&raw, &center, 1.0, &mut r)).collect();
        let (c_r, c_t) = estimate_primitive_constants(&inexact, &region, alpha, 3000, seed).unwrap();
        let m = inexact.with_error_constants(c_r, c_t).unwrap();
        let consts = m.constants();
        let mut checked = 0;
        while checked < 500 / 3 + 1 {
            let x = &region[r.random_range(0..region.len())];
            let len = alpha * r.random::<f64>() / (1.0 + c_r * alpha);
            let v_z = random_tangent_of_len(&m, x, len, &mut r).unwrap();
            let Ok(z) = m.retract(&v_z) else { continue };
            if m.dist(x, &z).unwrap() > alpha {
                continue;
            }
            let (f_z, g) = f.eval(&z).unwrap();
            let g_hat = m.transporter(&g, x).unwrap();
            let kappa = model_shift(m.norm(&g).unwrap(), alpha, &consts);
            let v = tangent_upto(&m, x, alpha, &mut r);
            let (f_v, _) = f.eval(&m.exp(&v).unwrap()).unwrap();
            let cut = f_z + Manifold::inner(&m, &g_hat, &v.sub(&v_z).unwrap()).unwrap() - kappa;
            assert!(cut <= f_v + 1e-7, "alpha {alpha}: cut {cut} above f {f_v}");
            checked += 1;
        }
    }
}

#[test]
fn shift_keeps_transported_cuts_below_hyperbolic_distance() {
    let h = Hyperboloid::new(2).unwrap();
    let o = h.origin();
    check_shift(h, o, 2);
}

#[test]
fn shift_keeps_transported_cuts_below_spd_distance() {
    let spd = Spd::new(3).unwrap();
    let i = spd.identity();
    check_shift(spd, i, 3);
}
