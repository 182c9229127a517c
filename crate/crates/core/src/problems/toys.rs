use nalgebra::DVector;

use super::{SubgradOracle, COINCIDENCE_TOL};
use crate::error::{Error, Result};
use crate::geometry::{ManifoldId, Manifold, Point, Tangent};

/// `f(x) = d(x, target)`: 1-sharp with minimum 0 at `target`.
#[derive(Debug, Clone)]
pub struct SharpOracle<M> {
    m: M,
    target: Point,
}

impl<M: Manifold> SharpOracle<M> {
    pub fn new(m: M, target: Point) -> Result<Self> {
        m.check_point(&target)?;
        Ok(Self { m, target })
    }

    pub fn target(&self) -> &Point {
        &self.target
    }
}

impl<M: Manifold> SubgradOracle for SharpOracle<M> {
    fn eval(&self, x: &Point) -> Result<(f64, Tangent)> {
        let d = self.m.dist(x, &self.target)?;
        if d <= COINCIDENCE_TOL {
            return Ok((d, Tangent::zero(x)));
        }
        let log = self.m.log(x, &self.target)?;
        Ok((d, log.scaled(-1.0 / d)))
    }

    fn lip_bound(&self) -> f64 {
        1.0
    }

    fn f_star_hint(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `f(x) = sum_i w_i |x_i - c_i|` on `R^d`, minimum 0 at `c`.
#[derive(Debug, Clone)]
pub struct WeightedL1 {
    weights: DVector<f64>,
    center: DVector<f64>,
}

impl WeightedL1 {
    pub fn new(weights: &[f64], center: &[f64]) -> Result<Self> {
        if weights.len() != center.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                got: center.len(),
            });
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidArgument("weights must be > 0".into()));
        }
        Ok(Self {
            weights: DVector::from_column_slice(weights),
            center: DVector::from_column_slice(center),
        })
    }

    pub fn minimizer(&self) -> Point {
        Point::new(ManifoldId::Euclidean, self.center.clone())
    }
}

impl SubgradOracle for WeightedL1 {
    fn eval(&self, x: &Point) -> Result<(f64, Tangent)> {
        let diff = x.coords() - &self.center;
        let f = diff.iter().zip(self.weights.iter()).map(|(d, w)| w * d.abs()).sum();
        let g = DVector::from_iterator(
            diff.len(),
            diff.iter().zip(self.weights.iter()).map(|(d, w)| {
                if *d > 0.0 {
                    *w
                } else if *d < 0.0 {
                    -*w
                } else {
                    0.0
                }
            }),
        );
        Ok((f, Tangent::new(x.clone(), g)?))
    }

    fn lip_bound(&self) -> f64 {
        self.weights.norm()
    }

    fn f_star_hint(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Oracle backed by a closure.
pub struct FnOracle<F> {
    f: F,
    lip: f64,
    f_star: Option<f64>,
}

impl<F> FnOracle<F>
where
    F: Fn(&Point) -> Result<(f64, Tangent)>,
{
    pub fn new(lip: f64, f: F) -> Self {
        Self { f, lip, f_star: None }
    }

    pub fn with_f_star(mut self, f_star: f64) -> Self {
        self.f_star = Some(f_star);
        self
    }
}

impl<F> SubgradOracle for FnOracle<F>
where
    F: Fn(&Point) -> Result<(f64, Tangent)>,
{
    fn eval(&self, x: &Point) -> Result<(f64, Tangent)> {
        (self.f)(x)
    }

    fn lip_bound(&self) -> f64 {
        self.lip
    }

    fn f_star_hint(&self) -> Option<f64> {
        self.f_star
    }
}
