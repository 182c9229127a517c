//! Defect measures for the invariants every [`Manifold`] realization must
//! satisfy. Handy when testing a new realization.

use rand::RngCore;

use super::{Manifold, Point, Tangent};
use crate::error::Result;

/// `|log_p(exp_p v) - v| / (1 + |v|)`.
pub fn roundtrip_defect<M: Manifold + ?Sized>(m: &M, v: &Tangent) -> Result<f64> {
    let q = m.exp(v)?;
    let back = m.log(v.base(), &q)?;
    Ok(m.norm(&back.sub(v)?)? / (1.0 + m.norm(v)?))
}

/// `| |Gamma v| - |v| | / |v|`, or 0 for `v = 0`.
pub fn isometry_defect<M: Manifold + ?Sized>(m: &M, v: &Tangent, to: &Point) -> Result<f64> {
    let n = m.norm(v)?;
    if n == 0.0 {
        return Ok(0.0);
    }
    let w = m.parallel_transport(v, to)?;
    Ok((m.norm(&w)? - n).abs() / n)
}

/// `|Gamma log_p q + log_q p| / d(p, q)`, or 0 when `p = q`.
pub fn velocity_transport_defect<M: Manifold + ?Sized>(m: &M, p: &Point, q: &Point) -> Result<f64> {
    let d = m.dist(p, q)?;
    if d == 0.0 {
        return Ok(0.0);
    }
    let fwd = m.parallel_transport(&m.log(p, q)?, q)?;
    let bwd = m.log(q, p)?;
    Ok(m.norm(&fwd.add_scaled(1.0, &bwd)?)? / d)
}

/// `d(exp(t v), R(t v)) / t` for each `t`.
pub fn retraction_ratios<M: Manifold + ?Sized>(m: &M, v: &Tangent, ts: &[f64]) -> Result<Vec<f64>> {
    ts.iter()
        .map(|&t| {
            let w = v.scaled(t);
            Ok(m.dist(&m.exp(&w)?, &m.retract(&w)?)? / t)
        })
        .collect()
}

/// `d(p, r) - d(p, q) - d(q, r)`; at most rounding error for a metric.
pub fn triangle_excess<M: Manifold + ?Sized>(m: &M, p: &Point, q: &Point, r: &Point) -> Result<f64> {
    Ok(m.dist(p, r)? - m.dist(p, q)? - m.dist(q, r)?)
}

/// Tangent at `p` with uniformly random direction and length `len`.
pub fn random_tangent_of_len<M: Manifold + ?Sized>(
    m: &M,
    p: &Point,
    len: f64,
    rng: &mut dyn RngCore,
) -> Result<Tangent> {
    let v = m.random_tangent(p, rng)?;
    let n = m.norm(&v)?;
    if n == 0.0 {
        return Ok(v);
    }
    Ok(v.scaled(len / n))
}

/// `exp_p` of a random tangent of length `len`.
pub fn random_point_near<M: Manifold + ?Sized>(
    m: &M,
    p: &Point,
    len: f64,
    rng: &mut dyn RngCore,
) -> Result<Point> {
    m.exp(&random_tangent_of_len(m, p, len, rng)?)
}
