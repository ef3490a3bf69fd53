//! Set-valued Young integration.
//!
//! The crate integrates a Hölder multifunction `F : [0,T] -> cc(M_{e,d})`
//! against a Hölder signal `w : [0,T] -> R^d` by collecting Young integrals of
//! a certified family of Hölder selections of `F`. Around that core it ships
//! the convex-body kernel (support functions, Hausdorff and Demyanov metrics,
//! Steiner selections, Minkowski calculus), Hölder path utilities with a
//! fractional Brownian motion generator, and Picard-type solvers for first-
//! and second-order differential inclusions.
//!
//! Module map:
//! - [`convex_bodies`]: polytope representation of `cc(R^n)` and its calculus.
//! - [`paths`]: sampled paths, Hölder seminorms, fBm.
//! - [`young`]: Young integration, Young–Loève certification, iterated integrals.
//! - [`aumann`]: selection families and the set-valued integral.
//! - [`inclusions`]: inclusion problems and solvers.
//! - [`experiment`]: the reproducible experiment runner behind the `setyoung` binary.

pub mod aumann;
pub mod convex_bodies;
pub mod experiment;
pub mod inclusions;
pub(crate) mod linalg;
pub(crate) mod quadrature;
pub mod paths;
pub mod rng;
pub mod young;

pub use aumann::{SelectionFamily, SetValuedPath};
pub use convex_bodies::{ConvexBody, SmoothBallMeasure};
pub use paths::SampledPath;
pub use young::YoungConfig;
