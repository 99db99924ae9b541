//! Feature-preserving ensemble transform particle filtering for compressible flow.
//!
//! The crate couples a WENO5 / Lax-Friedrichs / SSP-RK3 solver for the
//! compressible Euler equations with dynamic-time-warping feature alignment and
//! an exact transportation-simplex solver. Analysis particles are built from
//! feature-aligned convex combinations of forecast particles, so shocks, contact
//! discontinuities and rarefactions survive repeated assimilation cycles.
//!
//! Module map:
//!
//! - [`euler`]: grid, flow state, equation of state and the time integrator.
//! - [`features`]: difference-quotient feature extraction.
//! - [`dtw`]: optimal monotone alignment paths (1D and separable 2D).
//! - [`combine`]: aligned convex combination of fields and states.
//! - [`transport`]: distance matrices and the discrete Kantorovich LP.
//! - [`filters`]: likelihood weights, standard and feature-preserving ETPF.
//! - [`observation`]: sparse pressure sensors.
//! - [`harness`]: twin experiments, diagnostics and output files.
//! - [`exec`]: sequential / rayon execution backends.

// `!(x > 0.0)` is used on purpose so that NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combine;
pub mod dtw;
pub mod euler;
pub mod exec;
pub mod features;
pub mod filters;
pub mod harness;
pub mod observation;
pub mod transport;

mod error;

pub use error::{Error, Result};
pub use exec::Backend;
