use nalgebra::DVector;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::geometry::{GeometryConstants, Manifold, ManifoldId, Point, Tangent};

/// `M^n` with the product metric. Coordinates are the concatenation of the
/// component coordinates.
#[derive(Debug, Clone)]
pub struct Product<M> {
    base: M,
    n: usize,
    constants: GeometryConstants,
}

impl<M: Manifold> Product<M> {
    pub fn new(base: M, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("product needs at least one component".into()));
        }
        // One constants bundle serves every component, so the max over
        // components is the base's own.
        let constants = base.constants();
        Ok(Self { base, n, constants })
    }

    pub fn with_constants(mut self, constants: GeometryConstants) -> Result<Self> {
        constants.validate()?;
        self.constants = constants;
        Ok(self)
    }

    pub fn base(&self) -> &M {
        &self.base
    }

    pub fn components(&self) -> usize {
        self.n
    }

    fn block(&self) -> usize {
        self.base.ambient_len()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        let b = self.block();
        if !len.is_multiple_of(b) {
            return Err(Error::DimensionMismatch {
                expected: self.n * b,
                got: len,
            });
        }
        if len / b != self.n {
            return Err(Error::ComponentCountMismatch {
                expected: self.n,
                got: len / b,
            });
        }
        Ok(())
    }

    /// Concatenates component points.
    pub fn join(&self, parts: &[Point]) -> Result<Point> {
        if parts.len() != self.n {
            return Err(Error::ComponentCountMismatch {
                expected: self.n,
                got: parts.len(),
            });
        }
        let mut c = Vec::with_capacity(self.n * self.block());
        for p in parts {
            crate::geometry::ensure_len(self.block(), p.len())?;
            c.extend_from_slice(p.coords().as_slice());
        }
        Ok(Point::new(ManifoldId::Product, DVector::from_vec(c)))
    }

    pub fn component(&self, p: &Point, i: usize) -> Point {
        let b = self.block();
        Point::new(self.base.id(), p.coords().rows(i * b, b).into_owned())
    }

    pub fn split(&self, p: &Point) -> Result<Vec<Point>> {
        self.check_len(p.len())?;
        Ok((0..self.n).map(|i| self.component(p, i)).collect())
    }

    fn tangent_component(&self, base: &Point, v: &DVector<f64>, i: usize) -> Result<Tangent> {
        let b = self.block();
        Tangent::new(base.clone(), v.rows(i * b, b).into_owned())
    }

    /// Splits a product tangent into component tangents at the component
    /// base points.
    pub fn split_tangent(&self, v: &Tangent) -> Result<Vec<Tangent>> {
        let bases = self.split(v.base())?;
        bases
            .iter()
            .enumerate()
            .map(|(i, b)| self.tangent_component(b, v.coords(), i))
            .collect()
    }

    pub fn join_tangent(&self, base: &Point, parts: &[Tangent]) -> Result<Tangent> {
        self.check_len(base.len())?;
        if parts.len() != self.n {
            return Err(Error::ComponentCountMismatch {
                expected: self.n,
                got: parts.len(),
            });
        }
        let mut c = Vec::with_capacity(base.len());
        for t in parts {
            c.extend_from_slice(t.coords().as_slice());
        }
        Tangent::new(base.clone(), DVector::from_vec(c))
    }

    fn map_points(&self, v: &Tangent, f: impl Fn(&Tangent) -> Result<Point>) -> Result<Point> {
        let parts = self.split_tangent(v)?;
        let out: Result<Vec<Point>> = parts.iter().map(f).collect();
        self.join(&out?)
    }

    fn map_transport(
        &self,
        v: &Tangent,
        to: &Point,
        f: impl Fn(&Tangent, &Point) -> Result<Tangent>,
    ) -> Result<Tangent> {
        let parts = self.split_tangent(v)?;
        let targets = self.split(to)?;
        let out: Result<Vec<Tangent>> = parts.iter().zip(&targets).map(|(t, y)| f(t, y)).collect();
        self.join_tangent(to, &out?)
    }
}

impl<M: Manifold> Manifold for Product<M> {
    fn id(&self) -> ManifoldId {
        ManifoldId::Product
    }

    fn dim(&self) -> usize {
        self.n * self.base.dim()
    }

    fn ambient_len(&self) -> usize {
        self.n * self.block()
    }

    fn constants(&self) -> GeometryConstants {
        self.constants
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        for c in self.split(p)? {
            self.base.check_point(&c)?;
        }
        Ok(())
    }

    fn check_tangent(&self, v: &Tangent) -> Result<()> {
        for t in self.split_tangent(v)? {
            self.base.check_tangent(&t)?;
        }
        Ok(())
    }

    fn inner(&self, u: &Tangent, v: &Tangent) -> Result<f64> {
        if !u.same_base(v) {
            return Err(Error::BaseMismatch);
        }
        let us = self.split_tangent(u)?;
        let bases: Vec<&Point> = us.iter().map(|t| t.base()).collect();
        let mut s = 0.0;
        for (i, ut) in us.iter().enumerate() {
            let vt = self.tangent_component(bases[i], v.coords(), i)?;
            s += self.base.inner(ut, &vt)?;
        }
        Ok(s)
    }

    fn dist(&self, p: &Point, q: &Point) -> Result<f64> {
        let ps = self.split(p)?;
        let qs = self.split(q)?;
        let mut s = 0.0;
        for (a, b) in ps.iter().zip(&qs) {
            s += self.base.dist(a, b)?.powi(2);
        }
        Ok(s.sqrt())
    }

    fn exp(&self, v: &Tangent) -> Result<Point> {
        self.map_points(v, |t| self.base.exp(t))
    }

    fn log(&self, p: &Point, q: &Point) -> Result<Tangent> {
        let ps = self.split(p)?;
        let qs = self.split(q)?;
        let parts: Result<Vec<Tangent>> =
            ps.iter().zip(&qs).map(|(a, b)| self.base.log(a, b)).collect();
        self.join_tangent(p, &parts?)
    }

    fn parallel_transport(&self, v: &Tangent, to: &Point) -> Result<Tangent> {
        self.map_transport(v, to, |t, y| self.base.parallel_transport(t, y))
    }

    fn retract(&self, v: &Tangent) -> Result<Point> {
        self.map_points(v, |t| self.base.retract(t))
    }

    fn transporter(&self, v: &Tangent, to: &Point) -> Result<Tangent> {
        self.map_transport(v, to, |t, y| self.base.transporter(t, y))
    }

    fn project_point(&self, raw: DVector<f64>) -> Result<Point> {
        self.check_len(raw.len())?;
        let b = self.block();
        let parts: Result<Vec<Point>> = (0..self.n)
            .map(|i| self.base.project_point(raw.rows(i * b, b).into_owned()))
            .collect();
        self.join(&parts?)
    }

    fn project_tangent(&self, p: &Point, raw: DVector<f64>) -> Result<Tangent> {
        self.check_len(raw.len())?;
        let bases = self.split(p)?;
        let b = self.block();
        let parts: Result<Vec<Tangent>> = bases
            .iter()
            .enumerate()
            .map(|(i, x)| self.base.project_tangent(x, raw.rows(i * b, b).into_owned()))
            .collect();
        self.join_tangent(p, &parts?)
    }

    fn random_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> Result<Tangent> {
        let bases = self.split(p)?;
        let parts: Result<Vec<Tangent>> =
            bases.iter().map(|x| self.base.random_tangent(x, rng)).collect();
        self.join_tangent(p, &parts?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::Hyperboloid;

    #[test]
    fn singleton_matches_base() {
        let h = Hyperboloid::new(2).unwrap();
        let p = Product::new(h.clone(), 1).unwrap();
        let x = h.lift(&[0.2, 0.4]).unwrap();
        let y = h.lift(&[-1.0, 0.3]).unwrap();
        let px = p.join(std::slice::from_ref(&x)).unwrap();
        let py = p.join(std::slice::from_ref(&y)).unwrap();
        assert_eq!(p.dist(&px, &py).unwrap(), h.dist(&x, &y).unwrap());
        assert_eq!(p.log(&px, &py).unwrap().coords(), h.log(&x, &y).unwrap().coords());
    }

    #[test]
    fn dist_with_one_differing_slot() {
        let h = Hyperboloid::new(2).unwrap();
        let p = Product::new(h.clone(), 3).unwrap();
        let a = h.lift(&[0.1, 0.1]).unwrap();
        let b = h.lift(&[1.0, -0.5]).unwrap();
        let x = p.join(&[a.clone(), a.clone(), a.clone()]).unwrap();
        let y = p.join(&[a.clone(), b.clone(), a.clone()]).unwrap();
        assert_eq!(p.dist(&x, &y).unwrap(), h.dist(&a, &b).unwrap());
    }

    #[test]
    fn wrong_component_count() {
        let h = Hyperboloid::new(2).unwrap();
        let p = Product::new(h.clone(), 3).unwrap();
        let two = Point::new(ManifoldId::Product, DVector::zeros(6));
        assert_eq!(
            p.check_point(&two),
            Err(Error::ComponentCountMismatch { expected: 3, got: 2 })
        );
        assert!(matches!(p.join(&[h.origin()]), Err(Error::ComponentCountMismatch { .. })));
    }
}
