//! Numerical laboratory for scattering by obstacles.
//!
//! The crate traces exterior billiard trajectories inside a reference ball,
//! tabulates travelling-time lens data over the inward phase sphere, detects
//! trapped rays, propagates Jacobi frames to find conjugate points, and
//! compares the lens data of two scenes.
//!
//! Module map:
//! - [`geometry`]: implicit obstacles, scenes, validation, the Livshits construction.
//! - [`flow`]: ray/boundary intersection, specular reflection, trajectories.
//! - [`variation`]: Jacobi frames, flow differentials, rank and conjugacy tests.
//! - [`lens`]: phase-sphere sampling, lens tables, trapped sets, spectra, comparison.
//! - [`cli`]: the `lenslab` command-line driver.

// `!(x > y)` is used on purpose so that NaN takes the failing branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod lens;
pub mod svg;
pub mod variation;

pub use flow::{PhasePoint, Trajectory};
pub use geometry::{Obstacle, Scene};

/// Points and directions. Two-dimensional scenes keep `z = 0`.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Tool version embedded in every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
