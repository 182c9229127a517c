//! Symmetric positive-definite matrices with the affine-invariant metric
//! `<xi, eta>_X = tr(X^-1 xi X^-1 eta)`.
//!
//! Matrix exponentials, logarithms and square roots all go through the
//! symmetric eigendecomposition. The cheap primitives are the retraction
//! `X + xi` (refused when the result is not safely positive definite) and the
//! projection transporter, which is the identity on `Sym(d)`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::geometry::{ensure_len, std_normal, GeometryConstants, Manifold, ManifoldId, Point, Tangent};

/// Sizing and numerical safeguards for [`Spd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdConfig {
    pub d: usize,
    /// The retraction requires `lambda_min(X + xi) >= pd_margin * |X|`.
    pub pd_margin: f64,
    /// Eigenvalues at or below this are treated as singular.
    pub eig_tol: f64,
}

impl SpdConfig {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            pd_margin: 1e-10,
            eig_tol: 1e-14,
        }
    }
}

/// `S^d_+` with the affine-invariant metric.
#[derive(Debug, Clone)]
pub struct Spd {
    cfg: SpdConfig,
    constants: GeometryConstants,
}

/// Default curvature lower bound for the affine-invariant metric.
pub const SPD_DEFAULT_K_MIN: f64 = -0.5;

impl Spd {
    pub fn new(d: usize) -> Result<Self> {
        Self::with_config(SpdConfig::new(d))
    }

    pub fn with_config(cfg: SpdConfig) -> Result<Self> {
        if cfg.d == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be >= 1".into()));
        }
        if !(cfg.pd_margin > 0.0 && cfg.eig_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "pd_margin and eig_tol must be positive".into(),
            ));
        }
        let constants = GeometryConstants {
            k_min: SPD_DEFAULT_K_MIN,
            c_r: 1.0,
            c_t: 1.0,
            pd_margin: cfg.pd_margin,
            tol_mem: 1e-9,
        };
        Ok(Self { cfg, constants })
    }

    /// Replaces the constants bundle (k_min, c_r, c_t and tolerances).
    pub fn with_constants(mut self, constants: GeometryConstants) -> Result<Self> {
        constants.validate()?;
        self.cfg.pd_margin = constants.pd_margin;
        self.constants = constants;
        Ok(self)
    }

    pub fn config(&self) -> SpdConfig {
        self.cfg
    }

    pub fn matrix_dim(&self) -> usize {
        self.cfg.d
    }

    pub fn identity(&self) -> Point {
        self.point_unchecked(&DMatrix::identity(self.cfg.d, self.cfg.d))
    }

    /// Wraps a matrix as a point after validating membership.
    pub fn point(&self, m: &DMatrix<f64>) -> Result<Point> {
        let p = self.point_unchecked(m);
        self.check_point(&p)?;
        Ok(p)
    }

    pub fn tangent(&self, base: &Point, m: &DMatrix<f64>) -> Result<Tangent> {
        ensure_len(self.ambient_len(), m.len())?;
        let t = Tangent::new(base.clone(), DVector::from_column_slice(m.as_slice()))?;
        self.check_tangent(&t)?;
        Ok(t)
    }

    pub fn diag_point(&self, diag: &[f64]) -> Result<Point> {
        ensure_len(self.cfg.d, diag.len())?;
        self.point(&DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn diag_tangent(&self, base: &Point, diag: &[f64]) -> Result<Tangent> {
        ensure_len(self.cfg.d, diag.len())?;
        self.tangent(base, &DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    fn point_unchecked(&self, m: &DMatrix<f64>) -> Point {
        Point::new(ManifoldId::Spd, DVector::from_column_slice(m.as_slice()))
    }

    pub fn matrix(&self, coords: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.cfg.d, self.cfg.d, coords.as_slice())
    }

    fn roots(&self, x: &Point) -> Result<Roots> {
        ensure_len(self.ambient_len(), x.len())?;
        let eig = eigh(self.matrix(x.coords()))?;
        let lmin = eig.eigenvalues.min();
        if lmin <= self.cfg.eig_tol {
            return Err(Error::SingularMatrix);
        }
        Ok(Roots {
            half: spectral_fn(&eig, f64::sqrt),
            inv_half: spectral_fn(&eig, |l| 1.0 / l.sqrt()),
        })
    }

    fn cholesky(&self, x: &Point) -> Result<Cholesky<f64, nalgebra::Dyn>> {
        ensure_len(self.ambient_len(), x.len())?;
        Cholesky::new(self.matrix(x.coords())).ok_or(Error::SingularMatrix)
    }

    /// `X^-1/2 Y X^-1/2` eigendecomposition, shared by log and dist.
    fn whitened(&self, roots: &Roots, y: &Point) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
        ensure_len(self.ambient_len(), y.len())?;
        let m = symmetrize(&(&roots.inv_half * self.matrix(y.coords()) * &roots.inv_half));
        let eig = eigh(m)?;
        if eig.eigenvalues.min() <= 0.0 {
            return Err(Error::SingularMatrix);
        }
        Ok(eig)
    }

    fn sym_tangent(&self, base: &Point, m: DMatrix<f64>) -> Result<Tangent> {
        Tangent::new(base.clone(), DVector::from_column_slice(m.as_slice()))
    }

    fn tol(&self, scale: f64) -> f64 {
        self.constants.tol_mem * (1.0 + scale)
    }
}

struct Roots {
    half: DMatrix<f64>,
    inv_half: DMatrix<f64>,
}

fn eigh(m: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigendecompositionFailure);
    }
    SymmetricEigen::try_new(m, f64::EPSILON, 10_000).ok_or(Error::EigendecompositionFailure)
}

fn spectral_fn(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, l) in eig.eigenvalues.iter().enumerate() {
        let fl = f(*l);
        scaled.column_mut(j).scale_mut(fl);
    }
    symmetrize(&(scaled * v.transpose()))
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

impl Manifold for Spd {
    fn id(&self) -> ManifoldId {
        ManifoldId::Spd
    }

    fn dim(&self) -> usize {
        self.cfg.d * (self.cfg.d + 1) / 2
    }

    fn ambient_len(&self) -> usize {
        self.cfg.d * self.cfg.d
    }

    fn constants(&self) -> GeometryConstants {
        self.constants
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        ensure_len(self.ambient_len(), p.len())?;
        let m = self.matrix(p.coords());
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::MembershipViolation("non-finite entry".into()));
        }
        let asym = asymmetry(&m);
        if asym > self.tol(m.amax()) {
            return Err(Error::MembershipViolation(format!(
                "not symmetric (max asymmetry {asym:e})"
            )));
        }
        let lmin = eigh(symmetrize(&m))?.eigenvalues.min();
        if lmin <= 0.0 {
            return Err(Error::MembershipViolation(format!(
                "not positive definite (min eigenvalue {lmin:e})"
            )));
        }
        Ok(())
    }

    fn check_tangent(&self, v: &Tangent) -> Result<()> {
        ensure_len(self.ambient_len(), v.coords().len())?;
        let m = self.matrix(v.coords());
        let asym = asymmetry(&m);
        if !asym.is_finite() || asym > self.tol(m.amax()) {
            return Err(Error::TangencyViolation(format!(
                "tangent matrix not symmetric (max asymmetry {asym:e})"
            )));
        }
        Ok(())
    }

    fn inner(&self, u: &Tangent, v: &Tangent) -> Result<f64> {
        if !u.same_base(v) {
            return Err(Error::BaseMismatch);
        }
        let chol = self.cholesky(u.base())?;
        let l = chol.l();
        let whiten = |t: &Tangent| -> Result<DMatrix<f64>> {
            let z = l
                .solve_lower_triangular(&self.matrix(t.coords()))
                .ok_or(Error::SingularMatrix)?;
            let w = l
                .solve_lower_triangular(&z.transpose())
                .ok_or(Error::SingularMatrix)?;
            Ok(w.transpose())
        };
        let a = whiten(u)?;
        if u.coords() == v.coords() {
            return Ok(a.component_mul(&a.transpose()).sum());
        }
        let b = whiten(v)?;
        Ok(a.component_mul(&b.transpose()).sum())
    }

    fn dist(&self, p: &Point, q: &Point) -> Result<f64> {
        if p.coords() == q.coords() {
            self.check_point(q)?;
            return Ok(0.0);
        }
        let roots = self.roots(p)?;
        let eig = self.whitened(&roots, q)?;
        Ok(eig.eigenvalues.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
    }

    fn exp(&self, v: &Tangent) -> Result<Point> {
        let roots = self.roots(v.base())?;
        let m = symmetrize(&(&roots.inv_half * self.matrix(v.coords()) * &roots.inv_half));
        let e = spectral_fn(&eigh(m)?, f64::exp);
        self.project_point(DVector::from_column_slice(
            (&roots.half * e * &roots.half).as_slice(),
        ))
    }

    fn log(&self, p: &Point, q: &Point) -> Result<Tangent> {
        if p.coords() == q.coords() {
            self.check_point(q)?;
            return Ok(Tangent::zero(p));
        }
        let roots = self.roots(p)?;
        let eig = self.whitened(&roots, q)?;
        let l = spectral_fn(&eig, f64::ln);
        self.sym_tangent(p, symmetrize(&(&roots.half * l * &roots.half)))
    }

    fn parallel_transport(&self, v: &Tangent, to: &Point) -> Result<Tangent> {
        let x = v.base();
        if x.coords() == to.coords() {
            return Ok(v.clone());
        }
        let roots = self.roots(x)?;
        let eig = self.whitened(&roots, to)?;
        let s = spectral_fn(&eig, f64::sqrt);
        let e = &roots.half * s * &roots.inv_half;
        let out = &e * self.matrix(v.coords()) * e.transpose();
        self.sym_tangent(to, symmetrize(&out))
    }

    fn retract(&self, v: &Tangent) -> Result<Point> {
        let x = self.matrix(v.base().coords());
        let y = symmetrize(&(&x + self.matrix(v.coords())));
        let threshold = self.cfg.pd_margin * x.norm();
        let shifted = &y - DMatrix::identity(self.cfg.d, self.cfg.d) * threshold;
        if y.iter().any(|c| !c.is_finite()) || Cholesky::new(shifted).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(self.point_unchecked(&y))
    }

    fn transporter(&self, v: &Tangent, to: &Point) -> Result<Tangent> {
        ensure_len(self.ambient_len(), to.len())?;
        self.project_tangent(to, v.coords().clone())
    }

    fn project_point(&self, raw: DVector<f64>) -> Result<Point> {
        ensure_len(self.ambient_len(), raw.len())?;
        Ok(self.point_unchecked(&symmetrize(&self.matrix(&raw))))
    }

    fn project_tangent(&self, p: &Point, raw: DVector<f64>) -> Result<Tangent> {
        ensure_len(self.ambient_len(), raw.len())?;
        self.sym_tangent(p, symmetrize(&self.matrix(&raw)))
    }

    /// Logarithms and distances from `x` to every point in `ys`, reusing one
    /// factorization of `x`.
    fn logs_and_dists(&self, x: &Point, ys: &[Point]) -> Result<Vec<(Tangent, f64)>> {
        let roots = self.roots(x)?;
        ys.iter()
            .map(|y| {
                if y.coords() == x.coords() {
                    return Ok((Tangent::zero(x), 0.0));
                }
                let eig = self.whitened(&roots, y)?;
                let dist = eig.eigenvalues.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt();
                let log = spectral_fn(&eig, f64::ln);
                let v = symmetrize(&(&roots.half * log * &roots.half));
                Ok((self.sym_tangent(x, v)?, dist))
            })
            .collect()
    }

    fn random_tangent(&self, p: &Point, rng: &mut dyn RngCore) -> Result<Tangent> {
        let d = self.cfg.d;
        let mut s = DMatrix::zeros(d, d);
        for j in 0..d {
            s[(j, j)] = std_normal(rng);
            for i in 0..j {
                let v = std_normal(rng) / std::f64::consts::SQRT_2;
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        let roots = self.roots(p)?;
        self.sym_tangent(p, symmetrize(&(&roots.half * s * &roots.half)))
    }
}

/// Symmetric matrix whose entries are coordinates of a standard normal
/// tangent vector at the identity.
pub fn random_symmetric(d: usize, rng: &mut dyn RngCore) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(d, d);
    for j in 0..d {
        s[(j, j)] = std_normal(rng);
        for i in 0..j {
            let v = std_normal(rng) / std::f64::consts::SQRT_2;
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}
