use super::{SubgradOracle, COINCIDENCE_TOL};
use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point, Tangent};

/// Mean of geodesic distances to data points. Its minimizer is the
/// Riemannian median.
#[derive(Debug, Clone)]
pub struct MedianOracle<M> {
    m: M,
    data: Vec<Point>,
}

impl<M: Manifold> MedianOracle<M> {
    pub fn new(m: M, data: Vec<Point>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        for p in &data {
            m.check_point(p)?;
        }
        Ok(Self { m, data })
    }

    pub fn data(&self) -> &[Point] {
        &self.data
    }

    pub fn manifold(&self) -> &M {
        &self.m
    }
}

impl<M: Manifold> SubgradOracle for MedianOracle<M> {
    fn eval(&self, x: &Point) -> Result<(f64, Tangent)> {
        let n = self.data.len() as f64;
        let mut value = 0.0;
        let mut g = Tangent::zero(x);
        for (log, d) in self.m.logs_and_dists(x, &self.data)? {
            value += d;
            if d > COINCIDENCE_TOL {
                g = g.add_scaled(-1.0 / (n * d), &log)?;
            }
        }
        Ok((value / n, g))
    }

    fn lip_bound(&self) -> f64 {
        1.0
    }
}
