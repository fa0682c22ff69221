//! Spherical stochastic geometry on the unit sphere S^d in R^{d+1}.
//!
//! The crate provides four layers:
//!
//! * [`sphere`] — primitives: unit vectors, caps, surface measures, the
//!   incomplete sine integral, uniform sampling and rotations moving the
//!   spherical origin.
//! * [`convex`] — spherically convex polytopes in H- and V-representation,
//!   membership, polarity, vertex enumeration, radial functions, Hausdorff
//!   distance and vertex-subset simplification.
//! * [`functionals`] / [`constants`] — size, hitting and deviation
//!   functionals (volume, U1, the bisector functional, inradii, Delta_2,
//!   theta_r, tau) together with the explicit inequality constants and the
//!   inequality verifiers built on top of them.
//! * [`processes`] / [`estimators`] — Poisson-driven samplers (hyperplane
//!   tessellations, Crofton cells, Voronoi cells, typical cells) and the
//!   seeded, replication-parallel experiment harness.
//!
//! Everything is deterministic given a 64-bit seed; replications are
//! parallelised with per-replication derived seeds so the result does not
//! depend on the number of worker threads.

pub mod cli;
pub mod config;
pub mod constants;
pub mod convex;
pub mod error;
pub mod estimators;
pub mod functionals;
pub mod linalg;
pub mod mc;
pub mod processes;
pub mod report;
pub mod sphere;

pub use error::SphError;
