use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Manifold, Point};
use crate::error::{Error, Result};

/// Empirical retraction and transporter error constants.
///
/// Samples base points from `region`, tangent steps of length up to
/// `radius`, and returns the largest observed ratios
/// `dist(exp_x v, R_x v) / |v|^2` and
/// `|T(v) - Gamma(v)| / (|v| dist(x, y))`. Samples where the retraction
/// signals failure are skipped.
///
/// The realization passed here decides which primitives count as "inexact":
/// a manifold whose `retract` is `exp` yields `c_r = 0`.
pub fn estimate_primitive_constants<M: Manifold + ?Sized>(
    m: &M,
    region: &[Point],
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
    }
    if region.is_empty() {
        return Err(Error::InvalidArgument("region must not be empty".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    for p in region {
        m.check_point(p)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c_r: f64 = 0.0;
    let mut c_t: f64 = 0.0;
    for i in 0..n_samples {
        let x = &region[i % region.len()];

        let v = random_step(m, x, radius, &mut rng)?;
        let len = m.norm(&v)?;
        if len > 0.0 {
            match m.retract(&v) {
                Ok(r) => {
                    let e = m.exp(&v)?;
                    c_r = c_r.max(m.dist(&e, &r)? / (len * len));
                }
                Err(e) if e.is_retraction_failure() => {}
                Err(e) => return Err(e),
            }
        }

        let w = random_step(m, x, radius, &mut rng)?;
        let y = m.exp(&w)?;
        let d = m.dist(x, &y)?;
        let u = m.random_tangent(&y, &mut rng)?;
        let u_len = m.norm(&u)?;
        if d > 0.0 && u_len > 0.0 {
            let approx = m.transporter(&u, x)?;
            let exact = m.parallel_transport(&u, x)?;
            let diff = approx.sub(&exact)?;
            c_t = c_t.max(m.norm(&diff)? / (u_len * d));
        }
    }
    Ok((c_r, c_t))
}

fn random_step<M: Manifold + ?Sized>(
    m: &M,
    x: &Point,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> Result<super::Tangent> {
    let dir = m.random_tangent(x, rng)?;
    let n = m.norm(&dir)?;
    if n == 0.0 {
        return Ok(m.zero_tangent(x));
    }
    let t = radius * (0.05 + 0.95 * rng.random::<f64>());
    Ok(dir.scaled(t / n))
}
