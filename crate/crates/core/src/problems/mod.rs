//! Objective/subgradient oracles and data generators.

mod data;
mod median;
mod toys;
mod tv;

pub use data::{add_tangent_noise, default_wave_levels, gen_random_spd, gen_square_wave, DenoiseInstance};
pub use median::MedianOracle;
pub use toys::{FnOracle, SharpOracle, WeightedL1};
pub use tv::TvOracle;

use crate::error::Result;
use crate::geometry::{Point, Tangent};

/// Distances at or below this count as coincident points; the matching
/// subgradient summand is taken to be 0.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Access to `x -> (f(x), g(x))` with `g(x)` a Riemannian subgradient.
pub trait SubgradOracle {
    fn eval(&self, x: &Point) -> Result<(f64, Tangent)>;

    /// Lipschitz bound on the objective (bounds every subgradient norm).
    fn lip_bound(&self) -> f64;

    fn f_star_hint(&self) -> Option<f64> {
        None
    }
}

impl<T: SubgradOracle + ?Sized> SubgradOracle for &T {
    fn eval(&self, x: &Point) -> Result<(f64, Tangent)> {
        (**self).eval(x)
    }
    fn lip_bound(&self) -> f64 {
        (**self).lip_bound()
    }
    fn f_star_hint(&self) -> Option<f64> {
        (**self).f_star_hint()
    }
}

impl<T: SubgradOracle + ?Sized> SubgradOracle for Box<T> {
    fn eval(&self, x: &Point) -> Result<(f64, Tangent)> {
        (**self).eval(x)
    }
    fn lip_bound(&self) -> f64 {
        (**self).lip_bound()
    }
    fn f_star_hint(&self) -> Option<f64> {
        (**self).f_star_hint()
    }
}
