#![allow(dead_code)]

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_chacha::ChaCha8Rng;
use rpbm::geometry::contract::random_tangent_of_len;
use rpbm::{Euclidean, Hyperboloid, Manifold, Point, Product, Spd, Tangent};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The geometries every contract test covers, with a base point each.
pub fn realizations() -> Vec<(&'static str, Box<dyn Manifold>, Point)> {
    let spd = Spd::new(5).unwrap();
    let h2 = Hyperboloid::new(2).unwrap();
    let h10 = Hyperboloid::new(10).unwrap();
    let prod = Product::new(Hyperboloid::new(2).unwrap(), 8).unwrap();
    let e = Euclidean::new(10).unwrap();
    vec![
        ("euclidean(10)", Box::new(e.clone()), e.point(&[0.0; 10]).unwrap()),
        ("spd(5)", Box::new(spd.clone()), spd.identity()),
        ("h2", Box::new(h2.clone()), h2.origin()),
        ("h10", Box::new(h10.clone()), h10.origin()),
        ("h2^8", Box::new(prod.clone()), prod.join(&vec![h2.origin(); 8]).unwrap()),
    ]
}

/// Random point within distance `spread` of `base`.
pub fn point_near(m: &dyn Manifold, base: &Point, spread: f64, rng: &mut ChaCha8Rng) -> Point {
    let len = spread * rng.random::<f64>();
    m.exp(&random_tangent_of_len(m, base, len, rng).unwrap()).unwrap()
}

/// Random tangent at `p` with length uniform in `[0, max_len]`.
pub fn tangent_upto(m: &dyn Manifold, p: &Point, max_len: f64, rng: &mut ChaCha8Rng) -> Tangent {
    let len = max_len * rng.random::<f64>();
    random_tangent_of_len(m, p, len, rng).unwrap()
}

/// Maximizes `sum l_i b_i - |sum l_i g_i|^2 / (2 rho)` over the simplex by
/// a grid search that zooms in ten-fold around the incumbent each round.
pub fn grid_dual(b: &[f64], g: &[DVector<f64>], rho: f64) -> (f64, DVector<f64>) {
    let k = b.len();
    let eval = |l: &[f64]| -> f64 {
        let mut comb = DVector::zeros(g[0].len());
        let mut lin = 0.0;
        for i in 0..k {
            comb += &g[i] * l[i];
            lin += l[i] * b[i];
        }
        lin - comb.norm_squared() / (2.0 * rho)
    };
    let full = |free: &[f64]| -> Option<Vec<f64>> {
        let s: f64 = free.iter().sum();
        if free.iter().any(|v| *v < 0.0) || s > 1.0 {
            return None;
        }
        let mut l = free.to_vec();
        l.push(1.0 - s);
        Some(l)
    };
    let mut best_free = vec![0.0; k - 1];
    let mut best = eval(&full(&best_free).unwrap());
    // The first round covers the simplex; later rounds cover +-2 old steps.
    let mut h = 1.0 / 200.0;
    let (mut lo, mut hi) = (0i64, 200i64);
    let mut center = vec![0.0; k - 1];
    for _round in 0..10 {
        let mut idx = vec![lo; k - 1];
        loop {
            let free: Vec<f64> = (0..k - 1).map(|i| center[i] + idx[i] as f64 * h).collect();
            if let Some(l) = full(&free) {
                let v = eval(&l);
                if v > best {
                    best = v;
                    best_free = free;
                }
            }
            // Odometer over the (k - 1)-dimensional offset grid.
            let mut j = 0;
            while j < k - 1 {
                idx[j] += 1;
                if idx[j] <= hi {
                    break;
                }
                idx[j] = lo;
                j += 1;
            }
            if j == k - 1 {
                break;
            }
        }
        center = best_free.clone();
        h /= 10.0;
        (lo, hi) = (-20, 20);
    }
    let l = full(&best_free).unwrap();
    let mut comb = DVector::zeros(g[0].len());
    for i in 0..k {
        comb += &g[i] * l[i];
    }
    (best, -comb / rho)
}

pub fn normal_vec(n: usize, r: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(r))
}
