//! Proximal bundle method for nonsmooth geodesically convex optimization on
//! Hadamard manifolds.
//!
//! The method needs only a subgradient oracle, a first-order retraction and
//! a weak transporter. Exact variants (exponential map, parallel transport)
//! and a Riemannian subgradient baseline are included for comparison.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bundle;
pub mod error;
pub mod geometry;
pub mod hyperbolic;
pub mod problems;
pub mod spd;

pub use error::{Error, Result};
pub use geometry::{
    Euclidean, GeometryConstants, Manifold, ManifoldId, Point, RetractionKind, Tangent,
    TransportKind, WithPrimitives,
};
pub use hyperbolic::{minkowski_inner, Hyperboloid, Product};
pub use spd::Spd;
pub use problems::SubgradOracle;
