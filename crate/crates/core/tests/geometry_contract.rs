//! Contract invariants of every geometry on random inputs.

mod common;

use common::{point_near, realizations, rng, tangent_upto};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rpbm::geometry::contract::*;
use rpbm::geometry::estimate_primitive_constants;
use rpbm::{Manifold, Spd};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_log_roundtrip(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, m, base) in realizations() {
            let p = point_near(&*m, &base, 1.5, &mut r);
            let v = tangent_upto(&*m, &p, 5.0, &mut r);
            let e = roundtrip_defect(&*m, &v).unwrap();
            prop_assert!(e <= 1e-8, "{name}: roundtrip defect {e:e}");
        }
    }

    #[test]
    fn parallel_transport_is_isometric(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, m, base) in realizations() {
            let p = point_near(&*m, &base, 1.5, &mut r);
            let q = point_near(&*m, &base, 1.5, &mut r);
            let v = tangent_upto(&*m, &p, 3.0, &mut r);
            let e = isometry_defect(&*m, &v, &q).unwrap();
            prop_assert!(e <= 1e-8, "{name}: isometry defect {e:e}");
        }
    }

    #[test]
    fn transport_of_geodesic_velocity(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, m, base) in realizations() {
            let p = point_near(&*m, &base, 1.5, &mut r);
            let q = point_near(&*m, &base, 1.5, &mut r);
            let e = velocity_transport_defect(&*m, &p, &q).unwrap();
            prop_assert!(e <= 1e-8, "{name}: velocity transport defect {e:e}");
        }
    }

    #[test]
    fn retraction_agrees_to_first_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ts = [1e-1, 1e-2, 1e-3, 1e-4];
        for (name, m, base) in realizations() {
            let p = point_near(&*m, &base, 1.0, &mut r);
            let v = random_tangent_of_len(&*m, &p, 1.0, &mut r).unwrap();
            let ratios = retraction_ratios(&*m, &v, &ts).unwrap();
            for w in ratios.windows(2) {
                prop_assert!(w[1] <= w[0], "{name}: ratios not decreasing {ratios:?}");
            }
        }
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (name, m, base) in realizations() {
            let p = point_near(&*m, &base, 2.0, &mut r);
            let q = point_near(&*m, &base, 2.0, &mut r);
            let s = point_near(&*m, &base, 2.0, &mut r);
            let e = triangle_excess(&*m, &p, &q, &s).unwrap();
            prop_assert!(e <= 1e-8, "{name}: triangle excess {e:e}");
        }
    }

    #[test]
    fn spd_affine_invariance(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spd = Spd::new(4).unwrap();
        let x = point_near(&spd, &spd.identity(), 2.0, &mut r);
        let y = point_near(&spd, &spd.identity(), 2.0, &mut r);
        let a = DMatrix::from_fn(4, 4, |i, j| if i == j { 2.0 } else { 0.0 } + rand::Rng::random_range(&mut r, -0.5..0.5));
        let congr = |p: &rpbm::Point| spd.point(&(&a * spd.matrix(p.coords()) * a.transpose())).unwrap();
        let d = spd.dist(&x, &y).unwrap();
        let da = spd.dist(&congr(&x), &congr(&y)).unwrap();
        prop_assert!((d - da).abs() <= 1e-7 * (1.0 + d));
    }

    #[test]
    fn spd_distance_from_identity_is_frobenius(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spd = Spd::new(5).unwrap();
        let xi = tangent_upto(&spd, &spd.identity(), 4.0, &mut r);
        let d = spd.dist(&spd.identity(), &spd.exp(&xi).unwrap()).unwrap();
        prop_assert!((d - spd.matrix(xi.coords()).norm()).abs() <= 1e-8);
    }
}

#[test]
fn retraction_error_within_calibrated_constant() {
    let mut r = rng(11);
    for (name, m, base) in realizations() {
        let region: Vec<_> = (0..8).map(|_| point_near(&*m, &base, 1.0, &mut r)).collect();
        // The hyperboloid retraction breaks down at unit step length.
        let (c_r, _) = estimate_primitive_constants(&*m, &region, 0.5, 4000, 3).unwrap();
        for i in 0..200 {
            let p = &region[i % region.len()];
            let v = tangent_upto(&*m, p, 0.5, &mut r);
            let n = m.norm(&v).unwrap();
            let err = m.dist(&m.exp(&v).unwrap(), &m.retract(&v).unwrap()).unwrap();
            assert!(
                err <= 1.1 * c_r * n * n + 1e-12,
                "{name}: retraction error {err:e} above {c_r} |v|^2 = {:e}",
                c_r * n * n
            );
        }
    }
}
