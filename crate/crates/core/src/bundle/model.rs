//! Piecewise-affine lower model and its proximal subproblem.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point, Tangent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutKind {
    Anchor,
    New,
    Aggregate,
}

/// Affine function `v -> intercept + <gradient, v>` on the tangent space at
/// the model center.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub intercept: f64,
    pub gradient: Tangent,
    pub kind: CutKind,
}

impl Cut {
    pub fn new(intercept: f64, gradient: Tangent, kind: CutKind) -> Self {
        Self {
            intercept,
            gradient,
            kind,
        }
    }

    pub fn eval<M: Manifold + ?Sized>(&self, m: &M, v: &Tangent) -> Result<f64> {
        Ok(self.intercept + m.inner(&self.gradient, v)?)
    }
}

/// Max of at most three cuts sharing one center. The anchor cut is first.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeCutModel {
    center: Point,
    cuts: Vec<Cut>,
}

impl ThreeCutModel {
    /// Model consisting of the anchor cut `f_x + <g, v>` alone.
    pub fn anchor(center: Point, f_x: f64, g: Tangent) -> Result<Self> {
        g.ensure_base(&center)?;
        Ok(Self {
            center,
            cuts: vec![Cut::new(f_x, g, CutKind::Anchor)],
        })
    }

    /// Arbitrary cut list (1 to 3 entries, all based at `center`).
    pub fn from_cuts(center: Point, cuts: Vec<Cut>) -> Result<Self> {
        if cuts.is_empty() || cuts.len() > 3 {
            return Err(Error::InvalidArgument(format!(
                "model needs 1 to 3 cuts, got {}",
                cuts.len()
            )));
        }
        for c in &cuts {
            c.gradient.ensure_base(&center)?;
        }
        Ok(Self { center, cuts })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn anchor_cut(&self) -> &Cut {
        &self.cuts[0]
    }

    pub fn eval<M: Manifold + ?Sized>(&self, m: &M, v: &Tangent) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for c in &self.cuts {
            best = best.max(c.eval(m, v)?);
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub direction: Tangent,
    /// Simplex weights, one per cut (zero for inactive cuts).
    pub weights: Vec<f64>,
    pub active_set: Vec<usize>,
    /// Model value at the direction.
    pub model_value: f64,
    /// `model_value + rho/2 |d|^2`.
    pub model_prox_value: f64,
}

impl SolveResult {
    pub fn d_norm<M: Manifold + ?Sized>(&self, m: &M) -> Result<f64> {
        m.norm(&self.direction)
    }
}

const WEIGHT_TOL: f64 = 1e-10;
const CONSISTENCY_TOL: f64 = 1e-10;
const FALLBACK_TOL: f64 = 1e-7;

/// Subsets of `{0, .., n-1}` for `n <= 3`, by cardinality and then
/// lexicographically.
fn subsets(n: usize) -> Vec<Vec<usize>> {
    const ALL: [&[usize]; 7] = [&[0], &[1], &[2], &[0, 1], &[0, 2], &[1, 2], &[0, 1, 2]];
    ALL.iter()
        .filter(|s| s.iter().all(|&i| i < n))
        .map(|s| s.to_vec())
        .collect()
}

/// Weights solving the equality-constrained dual on subset `s`, or `None`
/// when the corresponding linear system is singular.
fn subset_weights(s: &[usize], b: &[f64], g: &[[f64; 3]; 3], rho: f64) -> Option<Vec<f64>> {
    match s.len() {
        1 => Some(vec![1.0]),
        2 => {
            let (i, j) = (s[0], s[1]);
            let den = g[i][i] - 2.0 * g[i][j] + g[j][j];
            let scale = g[i][i].abs() + g[j][j].abs();
            if !(den > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
                return None;
            }
            let t = (rho * (b[i] - b[j]) + g[j][j] - g[i][j]) / den;
            Some(vec![t, 1.0 - t])
        }
        3 => {
            let mut a = Matrix4::zeros();
            let mut rhs = Vector4::zeros();
            for r in 0..3 {
                for c in 0..3 {
                    a[(r, c)] = g[s[r]][s[c]] / rho;
                }
                a[(r, 3)] = 1.0;
                a[(3, r)] = 1.0;
                rhs[r] = b[s[r]];
            }
            rhs[3] = 1.0;
            let sol = a.lu().solve(&rhs)?;
            if sol.iter().any(|v| !v.is_finite()) {
                return None;
            }
            Some(vec![sol[0], sol[1], sol[2]])
        }
        _ => None,
    }
}

/// Exact minimizer of `model(v) + rho/2 |v|^2` by enumerating active sets
/// of the dual over the simplex.
pub fn solve_prox_subproblem<M: Manifold + ?Sized>(
    model: &ThreeCutModel,
    rho: f64,
    m: &M,
) -> Result<SolveResult> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("rho must be > 0, got {rho}")));
    }
    let cuts = model.cuts();
    let n = cuts.len();
    let b: Vec<f64> = cuts.iter().map(|c| c.intercept).collect();
    let mut g = [[0.0; 3]; 3];
    for i in 0..n {
        for j in i..n {
            let v = m.inner(&cuts[i].gradient, &cuts[j].gradient)?;
            g[i][j] = v;
            g[j][i] = v;
        }
    }

    // Cut values at the direction induced by full weights `w`:
    // b_j - (G w)_j / rho.
    let cut_values = |w: &[f64; 3]| -> [f64; 3] {
        let mut out = [0.0; 3];
        for j in 0..n {
            let gw: f64 = (0..n).map(|k| g[j][k] * w[k]).sum();
            out[j] = b[j] - gw / rho;
        }
        out
    };

    let mut best: Option<(f64, [f64; 3], Vec<usize>)> = None;
    let mut chosen: Option<([f64; 3], Vec<usize>)> = None;
    for s in subsets(n) {
        let Some(ws) = subset_weights(&s, &b, &g, rho) else {
            continue;
        };
        let mut w = [0.0; 3];
        for (k, &i) in s.iter().enumerate() {
            w[i] = ws[k];
        }
        let vals = cut_values(&w);
        let active = s.iter().map(|&i| vals[i]).fold(f64::NEG_INFINITY, f64::max);
        let tol = CONSISTENCY_TOL * (1.0 + active.abs());
        let neg = ws.iter().map(|&t| (-t).max(t - 1.0)).fold(0.0, f64::max);
        let excess = (0..n)
            .filter(|i| !s.contains(i))
            .map(|i| vals[i] - active)
            .fold(0.0, f64::max);
        if neg <= WEIGHT_TOL && excess <= tol {
            chosen = Some((w, s));
            break;
        }
        let violation = neg.max(excess / (1.0 + active.abs()));
        if best.as_ref().is_none_or(|(v, _, _)| violation < *v) {
            best = Some((violation, w, s));
        }
    }
    let (mut w, active_set) = match chosen {
        Some(c) => c,
        None => match best {
            Some((v, w, s)) if v <= FALLBACK_TOL => (w, s),
            _ => return Err(Error::DegenerateModel),
        },
    };

    // Clamp into the simplex.
    for t in w.iter_mut() {
        *t = t.clamp(0.0, 1.0);
    }
    let total: f64 = w.iter().sum();
    for t in w.iter_mut() {
        *t /= total;
    }

    let mut dir = Tangent::zero(model.center());
    for (j, c) in cuts.iter().enumerate() {
        if w[j] != 0.0 {
            dir = dir.add_scaled(-w[j] / rho, &c.gradient)?;
        }
    }
    let model_value = model.eval(m, &dir)?;
    let dn2 = m.inner(&dir, &dir)?.max(0.0);
    Ok(SolveResult {
        direction: dir,
        weights: w[..n].to_vec(),
        active_set,
        model_value,
        model_prox_value: model_value + 0.5 * rho * dn2,
    })
}

/// Two-cut closed form: `theta = min{1, rho gap / |g_hat - s|^2}` and
/// direction `-(theta g_hat + (1 - theta) s) / rho`. Parallel cuts
/// (`g_hat = s`) give `theta = 1`.
pub fn two_cut_theta<M: Manifold + ?Sized>(
    gap: f64,
    g_hat: &Tangent,
    s: &Tangent,
    rho: f64,
    m: &M,
) -> Result<(f64, Tangent)> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("rho must be > 0, got {rho}")));
    }
    let diff = g_hat.sub(s)?;
    let den = m.inner(&diff, &diff)?;
    let theta = if den > 0.0 {
        (rho * gap / den).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let dir = g_hat.scaled(-theta / rho).add_scaled(-(1.0 - theta) / rho, s)?;
    Ok((theta, dir))
}

/// `f_center - (model(d) + rho/2 |d|^2)`.
pub fn model_prox_gap(f_center: f64, solve: &SolveResult) -> f64 {
    f_center - solve.model_prox_value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Euclidean;

    fn setup() -> (Euclidean, Point) {
        let e = Euclidean::new(2).unwrap();
        let o = e.point(&[0.0, 0.0]).unwrap();
        (e, o)
    }

    #[test]
    fn subsets_order() {
        assert_eq!(
            subsets(3),
            vec![
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2]
            ]
        );
        assert_eq!(subsets(1), vec![vec![0]]);
    }

    #[test]
    fn single_cut() {
        let (e, o) = setup();
        let g = e.tangent(&o, &[3.0, -4.0]).unwrap();
        let model = ThreeCutModel::anchor(o.clone(), 2.0, g).unwrap();
        let r = solve_prox_subproblem(&model, 2.0, &e).unwrap();
        assert_eq!(r.direction.coords().as_slice(), &[-1.5, 2.0]);
        assert!((r.model_prox_value - (2.0 - 25.0 / 4.0)).abs() < 1e-12);
        assert!((model_prox_gap(2.0, &r) - 6.25).abs() < 1e-12);
    }

    #[test]
    fn symmetric_pair() {
        let (e, o) = setup();
        let cuts = vec![
            Cut::new(1.0, e.tangent(&o, &[1.0, 0.0]).unwrap(), CutKind::Anchor),
            Cut::new(1.0, e.tangent(&o, &[-1.0, 0.0]).unwrap(), CutKind::New),
        ];
        let model = ThreeCutModel::from_cuts(o, cuts).unwrap();
        let r = solve_prox_subproblem(&model, 1.0, &e).unwrap();
        assert!((r.weights[0] - 0.5).abs() < 1e-15 && (r.weights[1] - 0.5).abs() < 1e-15);
        assert!(r.direction.coords().norm() < 1e-15);
        assert!((r.model_prox_value - 1.0).abs() < 1e-15);
        assert_eq!(r.active_set, vec![0, 1]);
    }

    #[test]
    fn anchor_only_gap() {
        let (e, o) = setup();
        let zero = ThreeCutModel::anchor(o.clone(), 5.0, e.zero_tangent(&o)).unwrap();
        let r = solve_prox_subproblem(&zero, 1.0, &e).unwrap();
        assert_eq!(model_prox_gap(5.0, &r), 0.0);
        let unit = ThreeCutModel::anchor(o.clone(), 5.0, e.tangent(&o, &[0.6, 0.8]).unwrap()).unwrap();
        let r = solve_prox_subproblem(&unit, 2.0, &e).unwrap();
        assert!((model_prox_gap(5.0, &r) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_cut_examples() {
        let (e, o) = setup();
        let gh = e.tangent(&o, &[1.0, 0.0]).unwrap();
        let s = e.tangent(&o, &[-1.0, 0.0]).unwrap();
        let (t, d) = two_cut_theta(0.5, &gh, &s, 1.0, &e).unwrap();
        assert!((t - 0.125).abs() < 1e-15);
        assert!((d.coords()[0] - 0.75).abs() < 1e-15 && d.coords()[1] == 0.0);
        let (t, d) = two_cut_theta(100.0, &gh, &s, 2.0, &e).unwrap();
        assert_eq!(t, 1.0);
        assert_eq!(d.coords().as_slice(), &[-0.5, 0.0]);
        let (t, d) = two_cut_theta(0.3, &gh, &gh, 2.0, &e).unwrap();
        assert_eq!(t, 1.0);
        assert_eq!(d.coords().as_slice(), &[-0.5, 0.0]);
    }

    #[test]
    fn mixed_bases_rejected() {
        let (e, o) = setup();
        let q = e.point(&[1.0, 0.0]).unwrap();
        let g = e.tangent(&q, &[1.0, 0.0]).unwrap();
        assert_eq!(ThreeCutModel::anchor(o, 0.0, g), Err(Error::BaseMismatch));
    }
}
