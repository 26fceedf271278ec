//! Simulation and verification toolkit for stationary planar point processes
//! and the truncated random fields built on top of them.
//!
//! The crate is organized around a small set of layers:
//!
//! - [`pointproc`]: seeded samplers producing finite windowed realizations
//!   (Poisson, Cox mixtures, shifted/perturbed lattices, Ginibre eigenvalues,
//!   zeros of random Taylor series).
//! - [`special`]: Bessel functions, adaptive radial quadrature, oscillatory
//!   integrals and stationary-phase diagnostics.
//! - [`spectra`]: closed-form spectral measures (structure functions) for the
//!   supported processes and the spectral-side variance oracles.
//! - [`sums`], [`field`], [`potential`]: truncated reciprocal sums, field
//!   evaluations and potential increments over a realization.
//! - [`mc`]: the seeded-replicate Monte Carlo engine with complex-valued
//!   variance estimation and verdicts.
//! - [`experiments`]: named, reproducible experiments binding samplers,
//!   statistics and oracles together; these back the CLI and the acceptance
//!   suite.

pub mod error;
pub mod experiments;
pub mod field;
#[cfg(feature = "eigen")]
pub mod linalg;
pub mod mc;
pub mod pointproc;
pub mod potential;
pub mod report;
pub mod special;
pub mod spectra;
pub mod sums;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Shorthand constructor for complex scalars.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
