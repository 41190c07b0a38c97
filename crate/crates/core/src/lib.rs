//! Ricci flow of rotationally symmetric asymptotically (locally) Euclidean
//! metrics, together with the ADM mass and the asymptotic diagnostics that
//! are tracked along the flow.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: radial grids, warped-product metrics and their curvature,
//!   plus a brute-force coordinate curvature oracle.
//! * [`flow`]: method-of-lines Ricci flow and the scalar heat equation on the
//!   evolving background.
//! * [`diagnostics`]: mass, mass rate, volume ratio, decay fits, weighted norms
//!   and the residuals of the evolution identities.
//! * [`initialdata`]: analytic and randomized initial metrics.
//! * [`harness`]: experiment configuration, runs, refinement studies and I/O.

pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod harness;
pub mod initialdata;
pub mod io;

pub use error::{Error, Result};
pub use geometry::{CurvatureFields, RadialGrid, WarpedMetric};
