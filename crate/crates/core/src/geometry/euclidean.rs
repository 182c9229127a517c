use nalgebra::DVector;
use rand::RngCore;

use super::{ensure_len, std_normal, GeometryConstants, Manifold, ManifoldId, Point, Tangent};
use crate::error::{Error, Result};

/// Flat space `R^d`. All curvature and primitive error constants vanish.
#[derive(Debug, Clone)]
pub struct Euclidean {
    dim: usize,
    constants: GeometryConstants,
}

impl Euclidean {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        Ok(Self {
            dim,
            constants: GeometryConstants::flat(),
        })
    }

    pub fn point(&self, coords: &[f64]) -> Result<Point> {
        ensure_len(self.dim, coords.len())?;
        Ok(Point::from_slice(ManifoldId::Euclidean, coords))
    }

    pub fn tangent(&self, base: &Point, coords: &[f64]) -> Result<Tangent> {
        ensure_len(self.dim, coords.len())?;
        Tangent::new(base.clone(), DVector::from_column_slice(coords))
    }
}

impl Manifold for Euclidean {
    fn id(&self) -> ManifoldId {
        ManifoldId::Euclidean
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn ambient_len(&self) -> usize {
        self.dim
    }

    fn constants(&self) -> GeometryConstants {
        self.constants
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        ensure_len(self.dim, p.len())?;
        if p.coords().iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(Error::MembershipViolation("non-finite coordinate".into()))
        }
    }

    fn check_tangent(&self, v: &Tangent) -> Result<()> {
        ensure_len(self.dim, v.coords().len())?;
        if v.coords().iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(Error::TangencyViolation("non-finite coordinate".into()))
        }
    }

    fn inner(&self, u: &Tangent, v: &Tangent) -> Result<f64> {
        if !u.same_base(v) {
            return Err(Error::BaseMismatch);
        }
        Ok(u.coords().dot(v.coords()))
    }

    fn dist(&self, p: &Point, q: &Point) -> Result<f64> {
        ensure_len(p.len(), q.len())?;
        Ok((p.coords() - q.coords()).norm())
    }

    fn exp(&self, v: &Tangent) -> Result<Point> {
        Ok(Point::new(ManifoldId::Euclidean, v.base().coords() + v.coords()))
    }

    fn log(&self, p: &Point, q: &Point) -> Result<Tangent> {
        ensure_len(p.len(), q.len())?;
        Tangent::new(p.clone(), q.coords() - p.coords())
    }

    fn parallel_transport(&self, v: &Tangent, to: &Point) -> Result<Tangent> {
        ensure_len(v.coords().len(), to.len())?;
        Ok(v.clone().rebased(to.clone()))
    }

    fn retract(&self, v: &Tangent) -> Result<Point> {
        self.exp(v)
    }

    fn transporter(&self, v: &Tangent, to: &Point) -> Result<Tangent> {
        self.parallel_transport(v, to)
    }

    fn project_point(&self, raw: DVector<f64>) -> Result<Point> {
        ensure_len(self.dim, raw.len())?;
        Ok(Point::new(ManifoldId::Euclidean, raw))
    }

    fn project_tangent(&self, p: &Point, raw: DVector<f64>) -> Result<Tangent> {
        Tangent::new(p.clone(), raw)
    }

    fn random_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> Result<Tangent> {
        let coords = DVector::from_fn(self.dim, |_, _| std_normal(rng));
        Tangent::new(p.clone(), coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_is_vector_addition() {
        let e = Euclidean::new(2).unwrap();
        let p = e.point(&[1.0, 2.0]).unwrap();
        let v = e.tangent(&p, &[3.0, 4.0]).unwrap();
        assert_eq!(e.exp(&v).unwrap().coords().as_slice(), &[4.0, 6.0]);
        assert_eq!(e.retract(&v).unwrap(), e.exp(&v).unwrap());
    }

    #[test]
    fn dist_is_euclidean_norm() {
        let e = Euclidean::new(2).unwrap();
        let p = e.point(&[0.0, 0.0]).unwrap();
        let q = e.point(&[3.0, 4.0]).unwrap();
        assert_eq!(e.dist(&p, &q).unwrap(), 5.0);
    }

    #[test]
    fn transport_is_identity() {
        let e = Euclidean::new(3).unwrap();
        let p = e.point(&[0.0, 1.0, 2.0]).unwrap();
        let q = e.point(&[-5.0, 1.0, 7.0]).unwrap();
        let v = e.tangent(&p, &[1.0, -1.0, 0.5]).unwrap();
        let w = e.parallel_transport(&v, &q).unwrap();
        assert_eq!(w.coords(), v.coords());
        assert_eq!(w.base(), &q);
        assert_eq!(e.transporter(&v, &q).unwrap(), w);
    }

    #[test]
    fn constants_vanish() {
        let c = Euclidean::new(4).unwrap().constants();
        assert_eq!((c.k_min, c.c_r, c.c_t), (0.0, 0.0, 0.0));
    }

    #[test]
    fn every_finite_vector_is_a_point() {
        let e = Euclidean::new(3).unwrap();
        assert!(e.check_point(&e.point(&[1e300, -4.0, 0.0]).unwrap()).is_ok());
        let short = Point::from_slice(ManifoldId::Euclidean, &[1.0]);
        assert!(matches!(
            e.check_point(&short),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Euclidean::new(0).is_err());
    }
}
