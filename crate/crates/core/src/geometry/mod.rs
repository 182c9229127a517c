//! Manifold interface shared by every geometry.
//!
//! Points and tangent vectors are stored in an explicit ambient
//! representation (a flat coordinate vector). A [`Tangent`] always carries
//! its base point; combining tangents at different bases is an error.
//!
//! Each realization provides both the exact primitives (`exp`, `log`,
//! `parallel_transport`) and a cheap pair (`retract`, `transporter`). The
//! [`WithPrimitives`] adapter selects which pair the optimizers see.

mod calibrate;
pub mod contract;
mod euclidean;

pub use calibrate::estimate_primitive_constants;
pub use euclidean::Euclidean;

use nalgebra::DVector;
use rand::RngCore;

use crate::error::{Error, Result};

/// Tag identifying which realization produced a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldId {
    Euclidean,
    Spd,
    Hyperboloid,
    Product,
}

/// Manifold element in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    id: ManifoldId,
    coords: DVector<f64>,
}

impl Point {
    pub fn new(id: ManifoldId, coords: DVector<f64>) -> Self {
        Self { id, coords }
    }

    pub fn from_slice(id: ManifoldId, coords: &[f64]) -> Self {
        Self::new(id, DVector::from_column_slice(coords))
    }

    pub fn id(&self) -> ManifoldId {
        self.id
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Tangent vector together with the point it is attached to.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    base: Point,
    coords: DVector<f64>,
}

impl Tangent {
    pub fn new(base: Point, coords: DVector<f64>) -> Result<Self> {
        if base.len() != coords.len() {
            return Err(Error::DimensionMismatch {
                expected: base.len(),
                got: coords.len(),
            });
        }
        Ok(Self { base, coords })
    }

    pub fn zero(base: &Point) -> Self {
        Self {
            coords: DVector::zeros(base.len()),
            base: base.clone(),
        }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    /// Same ambient coordinates, attached to another base point. Callers are
    /// responsible for tangency at the new base.
    pub(crate) fn rebased(self, base: Point) -> Self {
        Self {
            base,
            coords: self.coords,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| *c == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Tangent {
        Tangent {
            base: self.base.clone(),
            coords: &self.coords * factor,
        }
    }

    pub fn same_base(&self, other: &Tangent) -> bool {
        self.base.coords == other.base.coords
    }

    pub fn ensure_base(&self, point: &Point) -> Result<()> {
        if self.base.coords == point.coords {
            Ok(())
        } else {
            Err(Error::BaseMismatch)
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &Tangent) -> Result<Tangent> {
        if !self.same_base(other) {
            return Err(Error::BaseMismatch);
        }
        Ok(Tangent {
            base: self.base.clone(),
            coords: &self.coords + &other.coords * factor,
        })
    }

    pub fn sub(&self, other: &Tangent) -> Result<Tangent> {
        self.add_scaled(-1.0, other)
    }
}

/// Curvature bound and primitive error constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConstants {
    /// Lower bound on sectional curvature (nonpositive).
    pub k_min: f64,
    /// Retraction error constant.
    pub c_r: f64,
    /// Transporter error constant.
    pub c_t: f64,
    /// Relative positive-definiteness margin used by the SPD retraction.
    pub pd_margin: f64,
    /// Membership tolerance.
    pub tol_mem: f64,
}

impl GeometryConstants {
    pub const fn flat() -> Self {
        Self {
            k_min: 0.0,
            c_r: 0.0,
            c_t: 0.0,
            pd_margin: 1e-10,
            tol_mem: 1e-9,
        }
    }

    pub fn with_k_min(mut self, k_min: f64) -> Self {
        self.k_min = k_min;
        self
    }

    pub fn with_errors(mut self, c_r: f64, c_t: f64) -> Self {
        self.c_r = c_r;
        self.c_t = c_t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.k_min, self.c_r, self.c_t, self.pd_margin, self.tol_mem]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("non-finite geometry constant".into()));
        }
        if self.k_min > 0.0 {
            return Err(Error::InvalidArgument("k_min must be <= 0".into()));
        }
        if self.c_r < 0.0 || self.c_t < 0.0 {
            return Err(Error::InvalidArgument("c_r and c_t must be >= 0".into()));
        }
        if self.pd_margin <= 0.0 || self.tol_mem <= 0.0 {
            return Err(Error::InvalidArgument(
                "pd_margin and tol_mem must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// The factor `2 sqrt(-k_min) + c_r + 2 c_t` shared by the shift and
    /// the backtracking constant.
    pub fn shift_factor(&self) -> f64 {
        2.0 * (-self.k_min).max(0.0).sqrt() + self.c_r + 2.0 * self.c_t
    }
}

impl Default for GeometryConstants {
    fn default() -> Self {
        Self::flat()
    }
}

/// Operation table every geometry realizes.
///
/// All operations are pure; implementations hold no interior mutability and
/// are safe to share between threads.
pub trait Manifold: Send + Sync + std::fmt::Debug {
    fn id(&self) -> ManifoldId;

    /// Intrinsic dimension.
    fn dim(&self) -> usize;

    /// Length of the ambient coordinate vector.
    fn ambient_len(&self) -> usize;

    fn constants(&self) -> GeometryConstants;

    fn check_point(&self, p: &Point) -> Result<()>;

    /// Checks tangency of `v` at its own base point.
    fn check_tangent(&self, v: &Tangent) -> Result<()>;

    fn inner(&self, u: &Tangent, v: &Tangent) -> Result<f64>;

    fn norm(&self, v: &Tangent) -> Result<f64> {
        Ok(self.inner(v, v)?.max(0.0).sqrt())
    }

    fn dist(&self, p: &Point, q: &Point) -> Result<f64>;

    fn exp(&self, v: &Tangent) -> Result<Point>;

    fn log(&self, p: &Point, q: &Point) -> Result<Tangent>;

    /// Parallel transport of `v` along the geodesic from its base to `to`.
    fn parallel_transport(&self, v: &Tangent, to: &Point) -> Result<Tangent>;

    /// First-order retraction. May fail with a recoverable signal.
    fn retract(&self, v: &Tangent) -> Result<Point>;

    /// Weak transporter from the base of `v` to `to`.
    fn transporter(&self, v: &Tangent, to: &Point) -> Result<Tangent>;

    fn project_point(&self, raw: DVector<f64>) -> Result<Point>;

    fn project_tangent(&self, p: &Point, raw: DVector<f64>) -> Result<Tangent>;

    /// Tangent vector at `p` whose coordinates in an orthonormal basis of
    /// `T_p M` are independent standard normals.
    fn random_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> Result<Tangent>;

    fn zero_tangent(&self, p: &Point) -> Tangent {
        Tangent::zero(p)
    }

    /// `(log_x y, dist(x, y))` for every `y` in `ys`. Realizations may share
    /// work across the batch.
    fn logs_and_dists(&self, x: &Point, ys: &[Point]) -> Result<Vec<(Tangent, f64)>> {
        ys.iter()
            .map(|y| Ok((self.log(x, y)?, self.dist(x, y)?)))
            .collect()
    }
}

macro_rules! forward_manifold {
    ($($ty:ty),*) => {$(
        impl<M: Manifold + ?Sized> Manifold for $ty {
            fn id(&self) -> ManifoldId { (**self).id() }
            fn dim(&self) -> usize { (**self).dim() }
            fn ambient_len(&self) -> usize { (**self).ambient_len() }
            fn constants(&self) -> GeometryConstants { (**self).constants() }
            fn check_point(&self, p: &Point) -> Result<()> { (**self).check_point(p) }
            fn check_tangent(&self, v: &Tangent) -> Result<()> { (**self).check_tangent(v) }
            fn inner(&self, u: &Tangent, v: &Tangent) -> Result<f64> { (**self).inner(u, v) }
            fn norm(&self, v: &Tangent) -> Result<f64> { (**self).norm(v) }
            fn dist(&self, p: &Point, q: &Point) -> Result<f64> { (**self).dist(p, q) }
            fn exp(&self, v: &Tangent) -> Result<Point> { (**self).exp(v) }
            fn log(&self, p: &Point, q: &Point) -> Result<Tangent> { (**self).log(p, q) }
            fn parallel_transport(&self, v: &Tangent, to: &Point) -> Result<Tangent> {
                (**self).parallel_transport(v, to)
            }
            fn retract(&self, v: &Tangent) -> Result<Point> { (**self).retract(v) }
            fn transporter(&self, v: &Tangent, to: &Point) -> Result<Tangent> {
                (**self).transporter(v, to)
            }
            fn project_point(&self, raw: DVector<f64>) -> Result<Point> { (**self).project_point(raw) }
            fn project_tangent(&self, p: &Point, raw: DVector<f64>) -> Result<Tangent> {
                (**self).project_tangent(p, raw)
            }
            fn random_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> Result<Tangent> {
                (**self).random_tangent(p, rng)
            }
            fn logs_and_dists(&self, x: &Point, ys: &[Point]) -> Result<Vec<(Tangent, f64)>> {
                (**self).logs_and_dists(x, ys)
            }
        }
    )*};
}

forward_manifold!(&M, Box<M>, std::sync::Arc<M>);

/// Free-standing validity check, the same as [`Manifold::check_point`].
pub fn check_point<M: Manifold + ?Sized>(m: &M, p: &Point) -> Result<()> {
    m.check_point(p)
}

/// Checks that `v` is based at `p` and tangent there.
pub fn check_tangent<M: Manifold + ?Sized>(m: &M, p: &Point, v: &Tangent) -> Result<()> {
    v.ensure_base(p)?;
    m.check_tangent(v)
}

/// How candidate points are produced from tangent steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RetractionKind {
    /// The exponential map.
    Exact,
    /// The realization's first-order retraction.
    FirstOrder,
}

/// How tangent vectors move between tangent spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransportKind {
    Parallel,
    /// The realization's weak transporter (ambient projection).
    Projection,
}

/// Wraps a realization so that `retract`/`transporter` resolve to the chosen
/// primitive. Exact choices zero out the matching error constant.
#[derive(Debug, Clone)]
pub struct WithPrimitives<M> {
    inner: M,
    retraction: RetractionKind,
    transport: TransportKind,
    errors: Option<(f64, f64)>,
}

impl<M: Manifold> WithPrimitives<M> {
    pub fn new(inner: M, retraction: RetractionKind, transport: TransportKind) -> Self {
        Self {
            inner,
            retraction,
            transport,
            errors: None,
        }
    }

    /// Replaces the inner `c_r` and `c_t`, e.g. with calibrated values.
    /// Exact primitives still report 0.
    pub fn with_error_constants(mut self, c_r: f64, c_t: f64) -> Result<Self> {
        if !(c_r >= 0.0 && c_t >= 0.0 && c_r.is_finite() && c_t.is_finite()) {
            return Err(Error::InvalidArgument("c_r and c_t must be finite and >= 0".into()));
        }
        self.errors = Some((c_r, c_t));
        Ok(self)
    }

    pub fn exact(inner: M) -> Self {
        Self::new(inner, RetractionKind::Exact, TransportKind::Parallel)
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn retraction(&self) -> RetractionKind {
        self.retraction
    }

    pub fn transport(&self) -> TransportKind {
        self.transport
    }
}

impl<M: Manifold> Manifold for WithPrimitives<M> {
    fn id(&self) -> ManifoldId {
        self.inner.id()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn ambient_len(&self) -> usize {
        self.inner.ambient_len()
    }
    fn constants(&self) -> GeometryConstants {
        let mut c = self.inner.constants();
        if let Some((c_r, c_t)) = self.errors {
            c.c_r = c_r;
            c.c_t = c_t;
        }
        if self.retraction == RetractionKind::Exact {
            c.c_r = 0.0;
        }
        if self.transport == TransportKind::Parallel {
            c.c_t = 0.0;
        }
        c
    }
    fn check_point(&self, p: &Point) -> Result<()> {
        self.inner.check_point(p)
    }
    fn check_tangent(&self, v: &Tangent) -> Result<()> {
        self.inner.check_tangent(v)
    }
    fn inner(&self, u: &Tangent, v: &Tangent) -> Result<f64> {
        self.inner.inner(u, v)
    }
    fn norm(&self, v: &Tangent) -> Result<f64> {
        self.inner.norm(v)
    }
    fn dist(&self, p: &Point, q: &Point) -> Result<f64> {
        self.inner.dist(p, q)
    }
    fn exp(&self, v: &Tangent) -> Result<Point> {
        self.inner.exp(v)
    }
    fn log(&self, p: &Point, q: &Point) -> Result<Tangent> {
        self.inner.log(p, q)
    }
    fn parallel_transport(&self, v: &Tangent, to: &Point) -> Result<Tangent> {
        self.inner.parallel_transport(v, to)
    }
    fn retract(&self, v: &Tangent) -> Result<Point> {
        match self.retraction {
            RetractionKind::Exact => self.inner.exp(v),
            RetractionKind::FirstOrder => self.inner.retract(v),
        }
    }
    fn transporter(&self, v: &Tangent, to: &Point) -> Result<Tangent> {
        match self.transport {
            TransportKind::Parallel => self.inner.parallel_transport(v, to),
            TransportKind::Projection => self.inner.transporter(v, to),
        }
    }
    fn project_point(&self, raw: DVector<f64>) -> Result<Point> {
        self.inner.project_point(raw)
    }
    fn project_tangent(&self, p: &Point, raw: DVector<f64>) -> Result<Tangent> {
        self.inner.project_tangent(p, raw)
    }
    fn random_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> Result<Tangent> {
        self.inner.random_tangent(p, rng)
    }
    fn logs_and_dists(&self, x: &Point, ys: &[Point]) -> Result<Vec<(Tangent, f64)>> {
        self.inner.logs_and_dists(x, ys)
    }
}

pub(crate) fn ensure_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Standard normal sample drawn from a trait-object RNG.
pub(crate) fn std_normal(rng: &mut dyn RngCore) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    StandardNormal.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangent_arithmetic_rejects_mixed_bases() {
        let p = Point::from_slice(ManifoldId::Euclidean, &[0.0, 0.0]);
        let q = Point::from_slice(ManifoldId::Euclidean, &[1.0, 0.0]);
        let u = Tangent::new(p, DVector::from_vec(vec![1.0, 2.0])).unwrap();
        let v = Tangent::new(q, DVector::from_vec(vec![1.0, 2.0])).unwrap();
        assert_eq!(u.add_scaled(1.0, &v), Err(Error::BaseMismatch));
        let w = u.add_scaled(2.0, &u).unwrap();
        assert_eq!(w.coords().as_slice(), &[3.0, 6.0]);
    }

    #[test]
    fn tangent_length_must_match_base() {
        let p = Point::from_slice(ManifoldId::Euclidean, &[0.0, 0.0]);
        let err = Tangent::new(p, DVector::from_vec(vec![1.0])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn constants_validation() {
        assert!(GeometryConstants::flat().validate().is_ok());
        assert!(GeometryConstants::flat().with_k_min(0.5).validate().is_err());
        assert!(GeometryConstants::flat()
            .with_errors(-1.0, 0.0)
            .validate()
            .is_err());
        let c = GeometryConstants::flat().with_k_min(-1.0).with_errors(0.5, 0.25);
        assert!((c.shift_factor() - 3.0).abs() < 1e-15);
    }
}
