//! Hyperboloid model of hyperbolic space `H_d` in `R^{d+1}` with the
//! Minkowski form `<x, y> = sum_i x_i y_i - x_{d+1} y_{d+1}`.
//!
//! Distances use the chord form `2 asinh(|x - y|_M / 2)`, which agrees with
//! `acosh(-<x, y>)` but keeps full precision for nearby points.

mod product;

pub use product::Product;

use nalgebra::DVector;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::geometry::{ensure_len, std_normal, GeometryConstants, Manifold, ManifoldId, Point, Tangent};

/// `x^T J y` with `J = diag(1, ..., 1, -1)`.
pub fn minkowski_inner(x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    ensure_len(x.len(), y.len())?;
    Ok(mink(x.as_slice(), y.as_slice()))
}

fn mink(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n - 1 {
        s += x[i] * y[i];
    }
    s - x[n - 1] * y[n - 1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperboloidConfig {
    pub d: usize,
    pub tol_mem: f64,
}

impl HyperboloidConfig {
    pub fn new(d: usize) -> Self {
        Self { d, tol_mem: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub struct Hyperboloid {
    d: usize,
    constants: GeometryConstants,
}

/// Below this distance `log` skips the `d / sinh d` rescaling.
const SERIES_CUTOFF: f64 = 1e-7;

impl Hyperboloid {
    pub fn new(d: usize) -> Result<Self> {
        Self::with_config(HyperboloidConfig::new(d))
    }

    pub fn with_config(cfg: HyperboloidConfig) -> Result<Self> {
        if cfg.d == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        let constants = GeometryConstants {
            k_min: -1.0,
            c_r: 1.0,
            c_t: 1.0,
            pd_margin: 1e-10,
            tol_mem: cfg.tol_mem,
        };
        constants.validate()?;
        Ok(Self { d: cfg.d, constants })
    }

    pub fn with_constants(mut self, constants: GeometryConstants) -> Result<Self> {
        constants.validate()?;
        self.constants = constants;
        Ok(self)
    }

    /// The vertex `(0, ..., 0, 1)`.
    pub fn origin(&self) -> Point {
        let mut c = DVector::zeros(self.d + 1);
        c[self.d] = 1.0;
        Point::new(ManifoldId::Hyperboloid, c)
    }

    pub fn point(&self, coords: &[f64]) -> Result<Point> {
        let p = Point::from_slice(ManifoldId::Hyperboloid, coords);
        self.check_point(&p)?;
        Ok(p)
    }

    /// Lifts spatial coordinates `(x_1, ..., x_d)` onto the upper sheet.
    pub fn lift(&self, spatial: &[f64]) -> Result<Point> {
        ensure_len(self.d, spatial.len())?;
        let mut c = DVector::zeros(self.d + 1);
        c.rows_mut(0, self.d).copy_from_slice(spatial);
        self.project_point(c)
    }

    pub fn tangent(&self, base: &Point, coords: &[f64]) -> Result<Tangent> {
        let t = Tangent::new(base.clone(), DVector::from_column_slice(coords))?;
        self.check_tangent(&t)?;
        Ok(t)
    }

    /// Parallel transport of the `i`-th standard basis vector of `T_o H_d`
    /// to `x`; these form an orthonormal basis of `T_x H_d`.
    pub fn basis_vector(&self, x: &Point, i: usize) -> DVector<f64> {
        let xc = x.coords();
        let c = xc[i] / (1.0 + xc[self.d]);
        let mut e = xc * c;
        e[i] += 1.0;
        e[self.d] += c;
        e
    }

    fn chord_dist(x: &[f64], y: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let c2 = mink(&diff, &diff).max(0.0);
        2.0 * (c2.sqrt() / 2.0).asinh()
    }

    fn tangent_part(x: &[f64], y: &[f64]) -> DVector<f64> {
        let xy = mink(x, y);
        DVector::from_iterator(x.len(), x.iter().zip(y).map(|(a, b)| b + xy * a))
    }

    fn tol(&self, scale: f64) -> f64 {
        self.constants.tol_mem * (1.0 + scale)
    }
}

impl Manifold for Hyperboloid {
    fn id(&self) -> ManifoldId {
        ManifoldId::Hyperboloid
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn ambient_len(&self) -> usize {
        self.d + 1
    }

    fn constants(&self) -> GeometryConstants {
        self.constants
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        ensure_len(self.d + 1, p.len())?;
        let c = p.coords();
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::MembershipViolation("non-finite coordinate".into()));
        }
        let q = mink(c.as_slice(), c.as_slice());
        if (q + 1.0).abs() > self.tol(c[self.d] * c[self.d]) {
            return Err(Error::MembershipViolation(format!(
                "Minkowski self-inner is {q}, expected -1"
            )));
        }
        if c[self.d] <= 0.0 {
            return Err(Error::MembershipViolation("point on the lower sheet".into()));
        }
        Ok(())
    }

    fn check_tangent(&self, v: &Tangent) -> Result<()> {
        ensure_len(self.d + 1, v.coords().len())?;
        let x = v.base().coords();
        let ip = mink(x.as_slice(), v.coords().as_slice());
        if !ip.is_finite() || ip.abs() > self.tol(x.norm() * v.coords().norm()) {
            return Err(Error::TangencyViolation(format!(
                "Minkowski inner with base is {ip}, expected 0"
            )));
        }
        Ok(())
    }

    fn inner(&self, u: &Tangent, v: &Tangent) -> Result<f64> {
        if !u.same_base(v) {
            return Err(Error::BaseMismatch);
        }
        minkowski_inner(u.coords(), v.coords())
    }

    fn dist(&self, p: &Point, q: &Point) -> Result<f64> {
        ensure_len(self.d + 1, p.len())?;
        ensure_len(self.d + 1, q.len())?;
        Ok(Self::chord_dist(p.coords().as_slice(), q.coords().as_slice()))
    }

    fn exp(&self, v: &Tangent) -> Result<Point> {
        ensure_len(self.d + 1, v.coords().len())?;
        if v.is_zero() {
            return Ok(v.base().clone());
        }
        let n = self.norm(v)?;
        if n == 0.0 {
            return Ok(v.base().clone());
        }
        let raw = v.base().coords() * n.cosh() + v.coords() * (n.sinh() / n);
        self.project_point(raw)
    }

    fn log(&self, p: &Point, q: &Point) -> Result<Tangent> {
        ensure_len(self.d + 1, p.len())?;
        ensure_len(self.d + 1, q.len())?;
        if p.coords() == q.coords() {
            return Ok(Tangent::zero(p));
        }
        let (x, y) = (p.coords().as_slice(), q.coords().as_slice());
        let d = Self::chord_dist(x, y);
        let u = Self::tangent_part(x, y);
        let un = mink(u.as_slice(), u.as_slice()).max(0.0).sqrt();
        let v = if d < SERIES_CUTOFF || un == 0.0 {
            // d / sinh(d) = 1 - d^2 / 6 + O(d^4)
            u * (1.0 - d * d / 6.0)
        } else {
            u * (d / un)
        };
        self.project_tangent(p, v)
    }

    fn parallel_transport(&self, v: &Tangent, to: &Point) -> Result<Tangent> {
        ensure_len(self.d + 1, to.len())?;
        let (x, y) = (v.base().coords(), to.coords());
        if x == y {
            return Ok(v.clone());
        }
        let c = mink(v.coords().as_slice(), y.as_slice()) / (1.0 - mink(x.as_slice(), y.as_slice()));
        let raw = v.coords() + (x + y) * c;
        self.project_tangent(to, raw)
    }

    fn retract(&self, v: &Tangent) -> Result<Point> {
        ensure_len(self.d + 1, v.coords().len())?;
        if v.is_zero() {
            return Ok(v.base().clone());
        }
        let w = v.base().coords() + v.coords();
        let n2 = -mink(w.as_slice(), w.as_slice());
        if !(n2 > 1e-12) || !n2.is_finite() || w[self.d] <= 0.0 {
            return Err(Error::NonTimelike);
        }
        self.project_point(w / n2.sqrt())
    }

    fn transporter(&self, v: &Tangent, to: &Point) -> Result<Tangent> {
        ensure_len(self.d + 1, to.len())?;
        if v.base().coords() == to.coords() {
            return Ok(v.clone());
        }
        self.project_tangent(to, v.coords().clone())
    }

    /// Keeps the spatial part and recomputes `x_{d+1} = sqrt(1 + |x|^2)`.
    fn project_point(&self, mut raw: DVector<f64>) -> Result<Point> {
        ensure_len(self.d + 1, raw.len())?;
        let s = raw.rows(0, self.d).norm_squared();
        raw[self.d] = (1.0 + s).sqrt();
        Ok(Point::new(ManifoldId::Hyperboloid, raw))
    }

    /// Minkowski-orthogonal projection `v + <v, p> p`.
    fn project_tangent(&self, p: &Point, raw: DVector<f64>) -> Result<Tangent> {
        ensure_len(self.d + 1, raw.len())?;
        let c = mink(raw.as_slice(), p.coords().as_slice());
        let v = raw + p.coords() * c;
        Tangent::new(p.clone(), v)
    }

    fn random_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> Result<Tangent> {
        ensure_len(self.d + 1, p.len())?;
        let mut v = DVector::zeros(self.d + 1);
        for i in 0..self.d {
            let xi = std_normal(rng);
            v += self.basis_vector(p, i) * xi;
        }
        self.project_tangent(p, v)
    }
}
