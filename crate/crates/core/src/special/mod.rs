//! Special functions and quadrature: Bessel functions of orders 0-2,
//! adaptive radial integration with divergence detection, oscillatory
//! integrals with stationary-phase diagnostics, and asymptotic tails for
//! Bessel-product integrals.

mod bessel;
mod oscillatory;
mod quad;
mod tails;

pub use bessel::{bessel_asymptotic_residual, bessel_identity_check, bessel_j, ASYMPTOTIC_CROSSOVER};
pub use oscillatory::{log_log_slope, oscillatory_integral, stationary_phase_ratio, PhaseRatio};
pub use quad::{
    adaptive_integral, adaptive_integral_with_breaks, gauss_kronrod_15, radial_integral,
    QuadratureSpec, RadialOutcome,
};
pub use tails::{bessel_product_tail, MIN_PHASE};
