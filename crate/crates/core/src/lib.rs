//! Total Jensen divergences and their applications.
//!
//! A total Jensen divergence measures the Jensen convexity gap of a strictly
//! convex generator `F` orthogonally to the chord through `(p, F(p))` and
//! `(q, F(q))` instead of vertically. This makes it invariant to rotations of
//! the coordinate system and amounts to scaling the skew Jensen divergence by
//! the conformal factor `rho_J(p, q) = 1 / sqrt(1 + s^2)`, `s` being the chord
//! slope.
//!
//! Modules:
//! - [`generators`]: convex generators with gradients, inverse gradients and Hessians.
//! - [`divergences`]: Jensen, Bregman, total variants, Jensen-Shannon, Gaussian KL.
//! - [`geometry`]: the orthogonal projection construction, used as an independent check.
//! - [`centroids`]: CCCP Jensen centroids and total Jensen centroids.
//! - [`robustness`]: influence functions of Jensen centroids.
//! - [`clustering`]: total Jensen k-means++ seeding, Lloyd iterations, bound constants.
//!
//! Everything is generic over the [`Scalar`] type; the `*64` aliases below fix
//! it to `f64`.

pub mod centroids;
pub mod clustering;
pub mod divergences;
pub mod error;
pub mod generators;
pub mod geometry;
pub mod linalg;
pub mod robustness;
pub mod scalar;

pub use centroids::{CentroidConfig, CentroidResult, Init, WeightedPointSet};
pub use clustering::{BoundConstants, ClusterModel, SeedingConfig};
pub use divergences::{ConformalFactors, DivergenceKind, DivergenceValue, Skew};
pub use error::{Error, Result};
pub use generators::{make_builtin, CustomGenerator, Generator, Interval, ScalarFamily};
pub use geometry::ProjectionResult;
pub use robustness::{InfluenceQuery, InfluenceResult};
pub use scalar::{lit, Scalar};

pub type Generator64 = Generator<f64>;
pub type Generator32 = Generator<f32>;
pub type Skew64 = Skew<f64>;
pub type WeightedPointSet64 = WeightedPointSet<f64>;
pub type CentroidConfig64 = CentroidConfig<f64>;
pub type CentroidResult64 = CentroidResult<f64>;
pub type ClusterModel64 = ClusterModel<f64>;
pub type SeedingConfig64 = SeedingConfig<f64>;
pub type BoundConstants64 = BoundConstants<f64>;
pub type ProjectionResult64 = ProjectionResult<f64>;
pub type DivergenceValue64 = DivergenceValue<f64>;
