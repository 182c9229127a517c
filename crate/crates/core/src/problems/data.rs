use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point};
use crate::hyperbolic::{Hyperboloid, Product};
use crate::spd::{random_symmetric, Spd};

/// `n` SPD matrices `exp_I(spread * S_j)` with `S_j` standard Gaussian in an
/// orthonormal basis of `Sym(d)` at the identity.
pub fn gen_random_spd(d: usize, n: usize, spread: f64, seed: u64) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one data point".into()));
    }
    let spd = Spd::new(d)?;
    let eye = spd.identity();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let s = random_symmetric(d, &mut rng) * spread;
            spd.exp(&spd.tangent(&eye, &s)?)
        })
        .collect()
}

/// Signal of length `n` that starts at `low` and switches between `low`
/// and `high` every `period / 2` samples.
pub fn gen_square_wave(n: usize, low: &Point, high: &Point, period: usize) -> Result<Point> {
    if n == 0 || period < 2 {
        return Err(Error::InvalidArgument("need n >= 1 and period >= 2".into()));
    }
    let h = Hyperboloid::new(2)?;
    h.check_point(low)?;
    h.check_point(high)?;
    let half = period / 2;
    let parts: Vec<Point> = (0..n)
        .map(|i| if (i % period) < half { low.clone() } else { high.clone() })
        .collect();
    Product::new(h, n)?.join(&parts)
}

/// Two levels at distance 1 on the geodesic through the vertex of `H_2`
/// along the first axis.
pub fn default_wave_levels() -> (Point, Point) {
    let h = Hyperboloid::new(2).expect("static dimension");
    let half = 0.5f64;
    let low = h.lift(&[-half.sinh(), 0.0]).expect("static dimension");
    let high = h.lift(&[half.sinh(), 0.0]).expect("static dimension");
    (low, high)
}

/// `exp_q(sigma X)` with `X` standard Gaussian in an orthonormal tangent
/// basis at `q` (componentwise on products).
pub fn add_tangent_noise<M: Manifold + ?Sized>(m: &M, q: &Point, sigma: f64, seed: u64) -> Result<Point> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidArgument("sigma must be >= 0".into()));
    }
    if sigma == 0.0 {
        return Ok(q.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = m.random_tangent(q, &mut rng)?.scaled(sigma);
    m.exp(&v)
}

/// Square wave on `(H_2)^n` plus tangent Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseInstance {
    pub clean: Point,
    pub noisy: Point,
    pub alpha: f64,
    pub n: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl DenoiseInstance {
    /// Square wave with four periods over the signal.
    pub fn generate(n: usize, alpha: f64, sigma: f64, seed: u64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument("alpha must be > 0".into()));
        }
        let (low, high) = default_wave_levels();
        let period = (n / 4).max(2);
        let clean = gen_square_wave(n, &low, &high, period)?;
        let m = Product::new(Hyperboloid::new(2)?, n)?;
        let noisy = add_tangent_noise(&m, &clean, sigma, seed)?;
        Ok(Self {
            clean,
            noisy,
            alpha,
            n,
            sigma,
            seed,
        })
    }

    pub fn manifold(&self) -> Result<Product<Hyperboloid>> {
        Product::new(Hyperboloid::new(2)?, self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_spread_gives_identities() {
        let pts = gen_random_spd(3, 4, 0.0, 1).unwrap();
        let spd = Spd::new(3).unwrap();
        for p in &pts {
            assert!((p.coords() - spd.identity().coords()).amax() < 1e-15);
        }
    }

    #[test]
    fn random_spd_valid_and_seeded() {
        let spd = Spd::new(4).unwrap();
        let a = gen_random_spd(4, 5, 1.0, 9).unwrap();
        for p in &a {
            spd.check_point(p).unwrap();
        }
        assert_eq!(a, gen_random_spd(4, 5, 1.0, 9).unwrap());
        assert_ne!(a, gen_random_spd(4, 5, 1.0, 10).unwrap());
    }

    #[test]
    fn square_wave_halves() {
        let (low, high) = default_wave_levels();
        let h = Hyperboloid::new(2).unwrap();
        assert!((h.dist(&low, &high).unwrap() - 1.0).abs() < 1e-14);
        let m = Product::new(h, 8).unwrap();
        let w = gen_square_wave(8, &low, &high, 8).unwrap();
        let parts = m.split(&w).unwrap();
        assert!(parts[..4].iter().all(|p| *p == low));
        assert!(parts[4..].iter().all(|p| *p == high));
        assert!(gen_square_wave(8, &low, &high, 1).is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let inst = DenoiseInstance::generate(16, 0.5, 0.0, 3).unwrap();
        assert_eq!(inst.clean, inst.noisy);
    }
}
