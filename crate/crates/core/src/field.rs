//! Truncated evaluations of the pole field and its increments, the
//! residue/charge contour identity, and the closed-form pairing kernels for
//! testing the transformed spectral measures.
//!
//! Conventions:
//!
//! - The moving-center truncation `sum_{|p - z| <= R} 1/(z - p)` is the
//!   canonical estimator of the stationary field; origin-centered variants
//!   are provided for representation tests.
//! - Evaluation points are never allowed within 1e-9 of a pole; the
//!   evaluation shifts the point by a fixed 1e-6 step and retries once, and
//!   the actually used point is recorded in the returned [`FieldSample`]
//!   when evaluated through [`evaluate`].

use crate::pointproc::PointConfiguration;
use crate::spectra::PairingKind;
use crate::sums::{psi_sum, ComplexSum};
use crate::{c64, Complex64, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Minimal allowed distance between an evaluation point and a pole.
pub const POLE_GUARD: f64 = 1e-9;
/// Deterministic perturbation applied when the guard trips.
pub const POLE_NUDGE: f64 = 1e-6;

/// Which truncated field a sample refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    ZetaCentered,
    VTrunc,
    WpTrunc,
    WpMoving,
    DeltaAZeta,
}

/// One recorded field evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub kind: FieldKind,
    /// The point actually used (after any pole-guard perturbation).
    pub at: Complex64,
    /// The shift for increment kinds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<Complex64>,
    pub trunc_radius: f64,
    pub value: Complex64,
    /// Whether the evaluation point was perturbed away from a pole.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub perturbed: bool,
}

fn min_pole_distance(config: &PointConfiguration, z: Complex64) -> f64 {
    config
        .points
        .iter()
        .map(|p| (z - p).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Apply the pole-guard policy: returns the (possibly nudged) evaluation
/// point and whether a nudge happened.
fn guarded_point(config: &PointConfiguration, z: Complex64) -> Result<(Complex64, bool)> {
    if min_pole_distance(config, z) >= POLE_GUARD {
        return Ok((z, false));
    }
    let shifted = z + c64(POLE_NUDGE, 0.0);
    let dist = min_pole_distance(config, shifted);
    if dist >= POLE_GUARD {
        return Ok((shifted, true));
    }
    Err(Error::PoleProximity {
        dist,
        pole_re: z.re,
        pole_im: z.im,
    })
}

fn check_moving_window(config: &PointConfiguration, z: Complex64, r: f64) -> Result<()> {
    if !(r >= 1.0) {
        return Err(Error::parameter("truncation radius must satisfy R >= 1"));
    }
    if z.norm() + r > config.window_radius + 1e-9 {
        return Err(Error::window(format!(
            "|z| + R = {} exceeds window radius {}",
            z.norm() + r,
            config.window_radius
        )));
    }
    Ok(())
}

/// Moving-center truncation of the stationary pole field:
/// `sum_{|p - z| <= R} 1/(z - p)`.
///
/// This is a valid estimator of the stationary field only for processes
/// satisfying the low-frequency condition; for the others it still defines
/// the stationary family of truncated sums.
pub fn v_truncated(config: &PointConfiguration, z: Complex64, r: f64) -> Result<Complex64> {
    check_moving_window(config, z, r)?;
    let (z, _) = guarded_point(config, z)?;
    let mut acc = ComplexSum::default();
    for p in &config.points {
        if (p - z).norm() <= r {
            acc.add((z - p).inv());
        }
    }
    Ok(acc.value())
}

/// Origin-centered truncation with the compensating reciprocal sum:
/// `sum_{|p| <= R} 1/(z - p) + Psi_1(R)`.
///
/// This is the finite-R representation of the regularized pole series minus
/// its uncomputable tail terms; the omitted terms vanish in L^2 as R grows.
pub fn zeta_centered(config: &PointConfiguration, z: Complex64, r: f64) -> Result<Complex64> {
    if !(r >= 1.0) || r > config.window_radius + 1e-9 {
        return Err(Error::window("truncation radius outside window"));
    }
    let (z, _) = guarded_point(config, z)?;
    let mut acc = ComplexSum::default();
    for p in &config.points {
        if p.norm() <= r {
            acc.add((z - p).inv());
        }
    }
    Ok(acc.value() + psi_sum(config, 1, r)?)
}

/// Origin-centered derivative field: `sum_{|p| <= R} (z - p)^{-2}`.
pub fn wp_truncated(config: &PointConfiguration, z: Complex64, r: f64) -> Result<Complex64> {
    if !(r >= 1.0) || r > config.window_radius + 1e-9 {
        return Err(Error::window("truncation radius outside window"));
    }
    let (z, _) = guarded_point(config, z)?;
    let mut acc = ComplexSum::default();
    for p in &config.points {
        if p.norm() <= r {
            let inv = (z - p).inv();
            acc.add(inv * inv);
        }
    }
    Ok(acc.value())
}

/// Moving-center derivative field: `sum_{|p - z| <= R} (z - p)^{-2}`,
/// stationary in distribution for every stationary input.
pub fn wp_truncated_moving(config: &PointConfiguration, z: Complex64, r: f64) -> Result<Complex64> {
    check_moving_window(config, z, r)?;
    let (z, _) = guarded_point(config, z)?;
    let mut acc = ComplexSum::default();
    for p in &config.points {
        if (p - z).norm() <= r {
            let inv = (z - p).inv();
            acc.add(inv * inv);
        }
    }
    Ok(acc.value())
}

/// Stationary increment of the pole field over the shift `a`:
/// `sum_{|p-z-a|<=R} 1/(z+a-p) - sum_{|p-z|<=R} 1/(z-p) + pi c conj(a)`.
pub fn delta_a_zeta(
    config: &PointConfiguration,
    z: Complex64,
    a: Complex64,
    r: f64,
) -> Result<Complex64> {
    if !(r >= 1.0) {
        return Err(Error::parameter("truncation radius must satisfy R >= 1"));
    }
    if z.norm() + a.norm() + r > config.window_radius + 1e-9 {
        return Err(Error::window("window guard with shift margin violated"));
    }
    if a == c64(0.0, 0.0) {
        return Ok(c64(0.0, 0.0));
    }
    let (z, _) = guarded_point(config, z)?;
    let za = z + a;
    // Separate accumulators per center keep the cocycle antisymmetry exact:
    // the reversed increment accumulates bitwise-identical branch sums.
    let mut shifted = ComplexSum::default();
    let mut base = ComplexSum::default();
    for p in &config.points {
        if (p - za).norm() <= r {
            let d = za - p;
            if d.norm() < POLE_GUARD {
                return Err(Error::PoleProximity {
                    dist: d.norm(),
                    pole_re: p.re,
                    pole_im: p.im,
                });
            }
            shifted.add(d.inv());
        }
        if (p - z).norm() <= r {
            base.add((z - p).inv());
        }
    }
    Ok(shifted.value() - base.value() + PI * config.cond_intensity * a.conj())
}

/// Record-keeping evaluation wrapper.
pub fn evaluate(
    config: &PointConfiguration,
    kind: FieldKind,
    z: Complex64,
    shift: Option<Complex64>,
    r: f64,
) -> Result<FieldSample> {
    let (at, perturbed) = guarded_point(config, z)?;
    let value = match kind {
        FieldKind::ZetaCentered => zeta_centered(config, at, r)?,
        FieldKind::VTrunc => v_truncated(config, at, r)?,
        FieldKind::WpTrunc => wp_truncated(config, at, r)?,
        FieldKind::WpMoving => wp_truncated_moving(config, at, r)?,
        FieldKind::DeltaAZeta => {
            let a = shift.ok_or_else(|| Error::parameter("increment kind needs a shift"))?;
            delta_a_zeta(config, at, a, r)?
        }
    };
    Ok(FieldSample {
        kind,
        at,
        shift,
        trunc_radius: r,
        value,
        perturbed,
    })
}

/// Distance from the contour `|z| = r` at which poles are subtracted and
/// reinserted analytically. A 4096-node trapezoid resolves singularities at
/// this distance to far below 1e-6; poles closer to the contour would
/// otherwise dominate the quadrature error.
const FLUX_SUBTRACT_BAND: f64 = 0.25;

/// Both sides of the residue/charge identity on the circle `|z| = r`:
///
/// - lhs: `(1/2 pi i) closed-integral of [sum_{|p|<=R} 1/(z-p) - pi c conj(z)] dz`
///   by an `n_nodes` trapezoid rule (spectrally accurate for smooth periodic
///   integrands); poles within [`FLUX_SUBTRACT_BAND`] of the contour are
///   subtracted from the integrand and their exact residues added back.
/// - rhs: `count(|p| <= r) - pi c r^2`.
///
/// If a pole sits within 1e-3 of the contour, `r` is nudged in steps of
/// 2e-3 (up to five attempts, alternating sides); an unresolvable collision
/// is a geometry error. Returns `(lhs, rhs, r_used)`.
pub fn charge_flux_identity(
    config: &PointConfiguration,
    r: f64,
    trunc_radius: f64,
    n_nodes: usize,
) -> Result<(Complex64, Complex64, f64)> {
    if !(r > 0.0) || trunc_radius < r || trunc_radius > config.window_radius + 1e-9 {
        return Err(Error::parameter(
            "need 0 < r <= R <= window radius for the contour identity",
        ));
    }
    if n_nodes < 16 {
        return Err(Error::parameter("contour rule needs at least 16 nodes"));
    }

    // Nudge the contour radius away from poles.
    let clearance = |radius: f64| {
        config
            .points
            .iter()
            .map(|p| (p.norm() - radius).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let mut r_used = r;
    let mut found = clearance(r) >= 1e-3;
    if !found {
        for k in 1..=5 {
            for sign in [1.0, -1.0] {
                let candidate = r + sign * 2e-3 * k as f64;
                if candidate > 0.0 && clearance(candidate) >= 1e-3 {
                    r_used = candidate;
                    found = true;
                    break;
                }
            }
            if found {
                break;
            }
        }
    }
    if !found {
        return Err(Error::Geometry(format!(
            "no pole-free contour radius within 1e-2 of r = {r}"
        )));
    }

    let included: Vec<Complex64> = config
        .points
        .iter()
        .filter(|p| p.norm() <= trunc_radius)
        .cloned()
        .collect();
    let near: Vec<Complex64> = included
        .iter()
        .filter(|p| (p.norm() - r_used).abs() < FLUX_SUBTRACT_BAND)
        .cloned()
        .collect();
    let c = config.cond_intensity;

    // Trapezoid over the contour of the integrand with near poles removed:
    // (1/2 pi i) integral f(z) dz = (1/n) sum f(z_j) z_j on |z| = r.
    let mut acc = ComplexSum::default();
    for j in 0..n_nodes {
        let theta = 2.0 * PI * j as f64 / n_nodes as f64;
        let zj = c64(r_used * theta.cos(), r_used * theta.sin());
        let mut f = c64(0.0, 0.0);
        for p in &included {
            f += (zj - p).inv();
        }
        for p in &near {
            f -= (zj - p).inv();
        }
        f -= PI * c * zj.conj();
        acc.add(f * zj);
    }
    let mut lhs = acc.value() / n_nodes as f64;
    // Exact residues of the subtracted poles.
    let near_inside = near.iter().filter(|p| p.norm() <= r_used).count();
    lhs += c64(near_inside as f64, 0.0);

    let count = config.count_in_disk(c64(0.0, 0.0), r_used) as f64;
    let rhs = c64(count - PI * c * r_used * r_used, 0.0);
    Ok((lhs, rhs, r_used))
}

/// Cauchy transform of the Gaussian `exp(-|x|^2 / w)` at `p`:
/// `int phi(x) (x - p)^{-1} dm(x) = -pi w (1 - e^{-|p|^2/w}) / p`.
pub fn gaussian_cauchy_transform(p: Complex64, w: f64) -> Complex64 {
    let q = p.norm_sqr() / w;
    if q < 1e-8 {
        // series: -pi conj(p) (1 - q/2 + q^2/6)
        return -PI * p.conj() * (1.0 - 0.5 * q + q * q / 6.0);
    }
    PI * w * (-q).exp_m1() / p
}

/// Derivative-pairing kernel (the transform of the Gaussian against a double
/// pole, in the principal-value sense):
/// `-pi (conj(p)/p) e^{-|p|^2/w} + pi w (1 - e^{-|p|^2/w}) / p^2`.
pub fn gaussian_beurling_transform(p: Complex64, w: f64) -> Complex64 {
    let q = p.norm_sqr() / w;
    if q < 1e-8 {
        // both terms are O(q); expanding: pi conj(p)^2 / (2 w) + O(q^2)
        return PI * p.conj() * p.conj() / (2.0 * w);
    }
    let e = (-q).exp();
    -PI * (p.conj() / p) * e - PI * w * (-q).exp_m1() / (p * p)
}

/// Window-truncated linear statistic realizing the pairing of a transformed
/// field against the Gaussian test function `exp(-|x|^2/w)`.
///
/// The pairing integrals are evaluated in closed form per point (Cauchy and
/// derivative transforms of Gaussians), replacing singular two-dimensional
/// quadrature by exact kernels:
///
/// - derivative field: `sum_{|p| <= S} B_w(p)`
/// - pole field:       `sum_{|p| <= S} C_w(p)`
/// - increment field:  `sum_{|p| <= S} [C_w(p - a) - C_w(p)]`
pub fn pairing_statistic(
    config: &PointConfiguration,
    kind: PairingKind,
    w: f64,
    window: f64,
) -> Result<Complex64> {
    if window > config.window_radius + 1e-9 {
        return Err(Error::window("pairing window exceeds configuration window"));
    }
    let mut acc = ComplexSum::default();
    for p in &config.points {
        if p.norm() > window {
            continue;
        }
        let term = match kind {
            PairingKind::WpField => gaussian_beurling_transform(*p, w),
            PairingKind::VField => gaussian_cauchy_transform(*p, w),
            PairingKind::DeltaZeta { a } => {
                gaussian_cauchy_transform(p - a, w) - gaussian_cauchy_transform(*p, w)
            }
        };
        acc.add(term);
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::{sample_poisson, shifted_lattice_with_shift, ConfigExtras};
    use approx::assert_abs_diff_eq;

    fn fixture(points: Vec<Complex64>, window: f64, intensity: f64) -> PointConfiguration {
        PointConfiguration {
            points,
            window_radius: window,
            model_id: "fixture".into(),
            cond_intensity: intensity,
            extras: ConfigExtras::default(),
        }
    }

    #[test]
    fn empty_config_fields_vanish() {
        let config = fixture(vec![], 10.0, 0.0);
        let z = c64(0.5, -0.25);
        assert_eq!(v_truncated(&config, z, 4.0).unwrap(), c64(0.0, 0.0));
        assert_eq!(zeta_centered(&config, z, 4.0).unwrap(), c64(0.0, 0.0));
        assert_eq!(wp_truncated(&config, z, 4.0).unwrap(), c64(0.0, 0.0));
    }

    #[test]
    fn single_point_values() {
        let config = fixture(vec![c64(1.0, 0.0)], 8.0, 0.0);
        let z = c64(0.0, 0.0);
        assert_eq!(v_truncated(&config, z, 2.0).unwrap(), c64(-1.0, 0.0));
        // 1/(0-1) + Psi_1(2) = -1 + 1 = 0
        assert_eq!(zeta_centered(&config, z, 2.0).unwrap(), c64(0.0, 0.0));
        assert_eq!(wp_truncated(&config, z, 2.0).unwrap(), c64(1.0, 0.0));
    }

    #[test]
    fn symmetric_fixtures_cancel_at_origin() {
        let config = shifted_lattice_with_shift(c64(0.0, 0.0), 24.0).unwrap();
        // Exclude the origin site (a pole at z = 0): the guard nudges and the
        // symmetric sums still cancel to near zero.
        let z = c64(0.5, 0.5); // deep-cell point of symmetry for the lattice
        let v = zeta_centered(&config, z, 20.0).unwrap();
        // By symmetry of Z^2 around (0.5, 0.5) within any origin-centered
        // disk truncation, partial asymmetry remains at the boundary; the
        // quarter-turn fixture at the origin is the exact statement:
        let config_no_origin = fixture(
            config.points.iter().filter(|p| p.norm() > 0.5).cloned().collect(),
            24.0,
            1.0,
        );
        let wp = wp_truncated(&config_no_origin, c64(0.0, 0.0), 20.0).unwrap();
        assert!(wp.norm() < 1e-12, "wp at center {wp}");
        assert!(v.is_finite() as u8 == 1);
    }

    #[test]
    fn pole_guard_nudges_and_reports() {
        let config = fixture(vec![c64(0.0, 0.0), c64(2.0, 0.0)], 8.0, 0.0);
        let sample = evaluate(&config, FieldKind::VTrunc, c64(0.0, 0.0), None, 3.0).unwrap();
        assert!(sample.perturbed);
        assert_abs_diff_eq!(sample.at.re, POLE_NUDGE, epsilon = 1e-18);
        assert!(sample.value.is_finite());
    }

    #[test]
    fn delta_a_zeta_trivial_and_lattice_shift() {
        let config = shifted_lattice_with_shift(c64(0.3, 0.7), 70.0).unwrap();
        let z = c64(0.3, 0.0);
        assert_eq!(
            delta_a_zeta(&config, z, c64(0.0, 0.0), 32.0).unwrap(),
            c64(0.0, 0.0)
        );
        // Unit lattice shift: the two pole sets coincide exactly, so only the
        // deterministic drift survives.
        let d = delta_a_zeta(&config, z, c64(1.0, 0.0), 64.0).unwrap();
        assert_abs_diff_eq!(d.re, PI, epsilon = 1e-10);
        assert_abs_diff_eq!(d.im, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn delta_a_zeta_cocycle_antisymmetry_is_exact() {
        let config = sample_poisson(1.0, 30.0, 4).unwrap();
        // Dyadic coordinates make z + a - a round-trip exactly, so the
        // reversed increment accumulates bitwise-identical branch sums.
        let z = c64(0.375, -0.25);
        let a = c64(1.0, 0.5);
        let forward = delta_a_zeta(&config, z, a, 16.0).unwrap();
        let backward = delta_a_zeta(&config, z + a, -a, 16.0).unwrap();
        assert_eq!(forward + backward, c64(0.0, 0.0));

        // Generic coordinates: exact up to the float round-trip of z + a - a.
        let z = c64(0.4, -0.2);
        let fwd = delta_a_zeta(&config, z, a, 16.0).unwrap();
        let bwd = delta_a_zeta(&config, z + a, -a, 16.0).unwrap();
        assert!((fwd + bwd).norm() < 1e-12);
    }

    #[test]
    fn v_truncated_equivariance_under_exact_translation() {
        // With points and shift exactly representable, the moving-center sum
        // reproduces identical terms.
        let points = vec![c64(0.25, 0.5), c64(-1.5, 0.75), c64(2.0, -0.25)];
        let config = fixture(points.clone(), 16.0, 0.0);
        let t = c64(3.0, -2.0);
        let translated = fixture(points.iter().map(|p| p + t).collect(), 16.0, 0.0);
        let z = c64(0.125, 0.25);
        let v1 = v_truncated(&config, z, 4.0).unwrap();
        let v2 = v_truncated(&translated, z + t, 4.0).unwrap();
        assert_eq!(v1, v2);
    }

    #[test]
    fn wp_finite_difference_of_zeta() {
        // (zeta(z+h) - zeta(z-h)) / 2h ~ -wp(z) with O(h^2) + truncation error.
        let config = sample_poisson(1.0, 70.0, 21).unwrap();
        let z = c64(0.3, 0.4);
        let r = 64.0;
        let h = 1e-4;
        let plus = zeta_centered(&config, z + c64(h, 0.0), r).unwrap();
        let minus = zeta_centered(&config, z - c64(h, 0.0), r).unwrap();
        let fd = (plus - minus) / (2.0 * h);
        let wp = wp_truncated(&config, z, r).unwrap();
        assert!(
            (fd + wp).norm() <= 1e-4 * wp.norm().max(1.0),
            "fd {fd} vs -wp {}",
            -wp
        );
    }

    #[test]
    fn flux_identity_empty_and_single_pole() {
        let empty = fixture(vec![], 8.0, 0.0);
        let (lhs, rhs, _) = charge_flux_identity(&empty, 1.0, 4.0, 512).unwrap();
        assert_eq!(lhs, c64(0.0, 0.0));
        assert_eq!(rhs, c64(0.0, 0.0));

        let single = fixture(vec![c64(0.5, 0.0)], 8.0, 0.0);
        let (lhs, rhs, _) = charge_flux_identity(&single, 1.0, 4.0, 512).unwrap();
        assert!((lhs - c64(1.0, 0.0)).norm() <= 1e-8, "lhs {lhs}");
        assert_eq!(rhs, c64(1.0, 0.0));
    }

    #[test]
    fn flux_identity_poisson_realizations() {
        for seed in 0..8u64 {
            let config = sample_poisson(1.0, 46.0, seed).unwrap();
            let (lhs, rhs, _) = charge_flux_identity(&config, 5.0, 45.0, 4096).unwrap();
            assert!(
                (lhs - rhs).norm() <= 1e-6,
                "seed {seed}: |lhs - rhs| = {:.3e}",
                (lhs - rhs).norm()
            );
        }
    }

    #[test]
    fn flux_identity_nudges_contour_off_poles() {
        // A point exactly on the requested contour forces a nudge.
        let config = fixture(vec![c64(1.0, 0.0), c64(0.2, 0.1)], 8.0, 0.0);
        let (lhs, rhs, r_used) = charge_flux_identity(&config, 1.0, 4.0, 1024).unwrap();
        assert!((r_used - 1.0).abs() >= 1e-3);
        assert!((lhs - rhs).norm() <= 1e-8);
    }

    #[test]
    fn gaussian_cauchy_transform_matches_quadrature_oracle() {
        // Polar quadrature around the singularity: with x = p + rho e^{i t},
        // the integrand is smooth and the 1/(x-p) factor becomes e^{-it}/rho
        // against rho drho dt.
        let w = 0.8;
        let p = c64(0.6, -0.3);
        let oracle = {
            let mut acc = c64(0.0, 0.0);
            let (n_r, n_t) = (4000, 256);
            let rho_max = 9.0;
            for i in 0..n_r {
                let rho = rho_max * (i as f64 + 0.5) / n_r as f64;
                let mut ring = c64(0.0, 0.0);
                for j in 0..n_t {
                    let t = 2.0 * PI * j as f64 / n_t as f64;
                    let x = p + c64(rho * t.cos(), rho * t.sin());
                    let phi = (-x.norm_sqr() / w).exp();
                    ring += phi * c64(t.cos(), -t.sin());
                }
                acc += ring * (2.0 * PI / n_t as f64) * (rho_max / n_r as f64);
            }
            acc
        };
        let exact = gaussian_cauchy_transform(p, w);
        assert!((exact - oracle).norm() < 1e-6, "{exact} vs {oracle}");
    }

    #[test]
    fn beurling_transform_is_wirtinger_derivative_of_cauchy_transform() {
        // The Cauchy transform is not holomorphic in p, so the check must
        // form the Wirtinger derivative (d_x - i d_y)/2 from both axis
        // differences.
        let w = 0.8;
        let p = c64(1.1, 0.4);
        let h = 1e-5;
        let fd_x = (gaussian_cauchy_transform(p + c64(h, 0.0), w)
            - gaussian_cauchy_transform(p - c64(h, 0.0), w))
            / (2.0 * h);
        let fd_y = (gaussian_cauchy_transform(p + c64(0.0, h), w)
            - gaussian_cauchy_transform(p - c64(0.0, h), w))
            / (2.0 * h);
        let fd = 0.5 * (fd_x - c64(0.0, 1.0) * fd_y);
        let exact = gaussian_beurling_transform(p, w);
        assert!((fd - exact).norm() < 1e-8, "fd {fd} vs {exact}");
        // far field ~ pi w / p^2 (mass of the Gaussian over p^2)
        let far = gaussian_beurling_transform(c64(50.0, 0.0), w);
        assert_abs_diff_eq!(far.re, PI * w / 2500.0, epsilon = 1e-12);
    }
}
