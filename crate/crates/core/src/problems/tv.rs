use super::{DenoiseInstance, SubgradOracle, COINCIDENCE_TOL};
use crate::error::Result;
use crate::geometry::{Manifold, Point, Tangent};
use crate::hyperbolic::{Hyperboloid, Product};

/// `f(p) = (1/n) (sum_i d(p_i, q_i)^2 / 2 + alpha sum_i d(p_i, p_{i+1}))`
/// for a signal `p` on `(H_2)^n` and noisy data `q`.
#[derive(Debug, Clone)]
pub struct TvOracle {
    m: Product<Hyperboloid>,
    noisy: Vec<Point>,
    alpha: f64,
    lip: f64,
}

impl TvOracle {
    pub fn new(inst: &DenoiseInstance) -> Result<Self> {
        let m = inst.manifold()?;
        let noisy = m.split(&inst.noisy)?;
        let alpha = inst.alpha;
        let mut oracle = Self {
            m,
            noisy,
            alpha,
            lip: 0.0,
        };
        // On the sublevel set {f <= f(q)} every data residual obeys
        // d_i^2 <= 2 n f(q) = 2 alpha TV(q). Each component subgradient is
        // then at most (R + 2 alpha) / n, so the product norm is at most
        // (R + 2 alpha) / sqrt(n).
        let n = oracle.noisy.len() as f64;
        let tv = oracle.total_variation(&oracle.noisy)?;
        let r = (2.0 * alpha * tv).sqrt();
        oracle.lip = (r + 2.0 * alpha) / n.sqrt();
        Ok(oracle)
    }

    pub fn manifold(&self) -> &Product<Hyperboloid> {
        &self.m
    }

    fn total_variation(&self, p: &[Point]) -> Result<f64> {
        let h = self.m.base();
        let mut tv = 0.0;
        for w in p.windows(2) {
            tv += h.dist(&w[0], &w[1])?;
        }
        Ok(tv)
    }
}

impl SubgradOracle for TvOracle {
    fn eval(&self, x: &Point) -> Result<(f64, Tangent)> {
        let h = self.m.base();
        let p = self.m.split(x)?;
        let n = p.len();
        let mut data = 0.0;
        let mut grads: Vec<Tangent> = Vec::with_capacity(n);
        for (pi, qi) in p.iter().zip(&self.noisy) {
            let (log, d) = (h.log(pi, qi)?, h.dist(pi, qi)?);
            data += 0.5 * d * d;
            grads.push(log.scaled(-1.0));
        }
        let mut tv = 0.0;
        for i in 0..n.saturating_sub(1) {
            let d = h.dist(&p[i], &p[i + 1])?;
            tv += d;
            if d > COINCIDENCE_TOL {
                let fwd = h.log(&p[i], &p[i + 1])?;
                let bwd = h.log(&p[i + 1], &p[i])?;
                grads[i] = grads[i].add_scaled(-self.alpha / d, &fwd)?;
                grads[i + 1] = grads[i + 1].add_scaled(-self.alpha / d, &bwd)?;
            }
        }
        let scale = 1.0 / n as f64;
        let grads: Vec<Tangent> = grads.iter().map(|g| g.scaled(scale)).collect();
        let g = self.m.join_tangent(x, &grads)?;
        Ok(((data + self.alpha * tv) * scale, g))
    }

    fn lip_bound(&self) -> f64 {
        self.lip
    }
}
