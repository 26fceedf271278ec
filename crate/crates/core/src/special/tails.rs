//! Closed-form tails for integrals of Bessel-function products.
//!
//! The spectral-side variance integrals have integrands built from
//! `J_nu(a r) J_mu(b r) r^{-q}` whose envelopes decay only algebraically, so
//! cutting them off numerically would cost either accuracy or millions of
//! oscillation-resolving nodes. Past a moderate radius the Hankel expansion
//! turns each product into a short sum of terms `c e^{i Omega r} r^{-p}`,
//! and `int_v^inf e^{i Omega r} r^{-p} dr` has a rapidly convergent
//! integration-by-parts series once `Omega v` is large. This module evaluates
//! those tails to near machine precision.

use crate::{c64, Complex64, Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};

/// Minimal phase `Omega * v` at which the integration-by-parts series and the
/// Hankel expansions are accepted.
pub const MIN_PHASE: f64 = 40.0;

/// Hankel coefficient sequence `T_m(nu)`: `P + iQ = sum_m i^m T_m / x^m`.
fn hankel_t(order: u32, count: usize) -> Vec<f64> {
    let mu = 4.0 * (order as f64) * (order as f64);
    let mut t = Vec::with_capacity(count);
    t.push(1.0);
    for m in 1..count {
        let odd = 2.0 * m as f64 - 1.0;
        let prev = t[m - 1];
        t.push(prev * (mu - odd * odd) / (8.0 * m as f64));
    }
    t
}

/// `int_v^inf e^{i omega r} r^{-p} dr` for `omega != 0`, `|omega| v >= MIN_PHASE`.
fn exp_power_tail(omega: f64, p: i32, v: f64) -> Complex64 {
    if omega < 0.0 {
        return exp_power_tail(-omega, p, v).conj();
    }
    debug_assert!(omega * v >= MIN_PHASE * 0.99);
    let iw = c64(0.0, omega);
    let lead = -c64(0.0, omega * v).exp() / iw;
    let mut term = c64(v.powi(-p), 0.0);
    let mut sum = term;
    let mut last = term.norm();
    for j in 0..30 {
        term = term * (p as f64 + j as f64) / (iw * v);
        let norm = term.norm();
        if norm >= last {
            break;
        }
        sum += term;
        last = norm;
        if norm < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
    }
    lead * sum
}

/// `int_v^inf J_{nu1}(a1 r) J_{nu2}(a2 r) r^{-q} dr` via Hankel expansions.
///
/// Requires `q >= 1`, `a1 v` and `a2 v` in the asymptotic regime, and the
/// difference frequency `|a1 - a2|` either exactly zero or large enough that
/// `|a1 - a2| v >= MIN_PHASE`. Callers pick `v` accordingly.
pub fn bessel_product_tail(nu1: u32, a1: f64, nu2: u32, a2: f64, q: i32, v: f64) -> Result<f64> {
    if q < 1 {
        return Err(Error::parameter("tail power q must be >= 1"));
    }
    if a1 <= 0.0 || a2 <= 0.0 || v <= 0.0 {
        return Err(Error::parameter("tail requires positive frequencies and radius"));
    }
    let diff = a1 - a2;
    let dc = diff.abs() < 1e-12 * a1.max(a2);
    if a1 * v < MIN_PHASE || a2 * v < MIN_PHASE || (!dc && diff.abs() * v < MIN_PHASE) {
        return Err(Error::parameter(format!(
            "tail start v={v} too small for frequencies ({a1}, {a2})"
        )));
    }

    const TERMS: usize = 5;
    let t1 = hankel_t(nu1, TERMS);
    let t2 = hankel_t(nu2, TERMS);
    // Per-factor series coefficients in 1/r: s_m = i^m T_m / a^m.
    let series = |t: &[f64], a: f64| -> Vec<Complex64> {
        t.iter()
            .enumerate()
            .map(|(m, &tm)| c64(0.0, 1.0).powu(m as u32) * tm / a.powi(m as i32))
            .collect()
    };
    let s1 = series(&t1, a1);
    let s2 = series(&t2, a2);

    let prefactor = 2.0 / (PI * (a1 * a2).sqrt());
    let phase_sum = c64(0.0, -((nu1 + nu2) as f64) * FRAC_PI_2 - FRAC_PI_2).exp();
    let phase_diff = c64(0.0, -(nu1 as f64 - nu2 as f64) * FRAC_PI_2).exp();

    let mut total = 0.0;
    let max_m = 2 * (TERMS - 1);
    for m in 0..=max_m {
        // Convolutions for the sum- and difference-frequency channels.
        let mut c_plus = c64(0.0, 0.0);
        let mut c_minus = c64(0.0, 0.0);
        for j in 0..TERMS.min(m + 1) {
            let k = m - j;
            if k >= TERMS {
                continue;
            }
            c_plus += s1[j] * s2[k];
            c_minus += s1[j] * s2[k].conj();
        }
        let p = 1 + m as i32 + q;
        // Sum-frequency channel is always oscillatory.
        let i_plus = exp_power_tail(a1 + a2, p, v);
        total += 0.5 * prefactor * (c_plus * phase_sum * i_plus).re;
        // Difference channel: DC when a1 == a2.
        if dc {
            let dc_integral = v.powi(1 - p) / (p as f64 - 1.0);
            total += 0.5 * prefactor * (c_minus * phase_diff).re * dc_integral;
        } else {
            let i_minus = exp_power_tail(diff, p, v);
            total += 0.5 * prefactor * (c_minus * phase_diff * i_minus).re;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel::bessel_j;
    use crate::special::quad::{adaptive_integral_with_breaks, QuadratureSpec};
    use approx::assert_abs_diff_eq;

    fn breaks(a: f64, b: f64, per_unit: f64) -> Vec<f64> {
        let n = ((b - a) * per_unit).ceil().max(4.0) as usize;
        (0..=n).map(|j| a + (b - a) * j as f64 / n as f64).collect()
    }

    #[test]
    fn fast_decay_tail_matches_quadrature() {
        // q = 3 decays fast enough that a finite-interval reference suffices.
        let (a1, a2, v) = (7.0, 19.0, 8.0);
        let tail = bessel_product_tail(1, a1, 1, a2, 3, v).unwrap();
        let spec = QuadratureSpec::with_tols(1e-13, 1e-13);
        let big = 3.0e4;
        let f = |r: f64| bessel_j(1, a1 * r) * bessel_j(1, a2 * r) * r.powi(-3);
        let reference = adaptive_integral_with_breaks(f, &breaks(v, 200.0, express(a1 + a2)), &spec).unwrap()
            + adaptive_integral_with_breaks(f, &breaks(200.0, big, 0.02 * (a1 + a2)), &spec)
                .unwrap_or(0.0);
        // The [200, 3e4] piece is itself oscillatory; compare loosely there
        // but tightly overall since the envelope past 200 is ~1e-7.
        assert_abs_diff_eq!(tail, reference, epsilon = 1e-6);
    }

    fn express(freq: f64) -> f64 {
        // panels per unit radius: ~6 per oscillation
        freq
    }

    #[test]
    fn psi1_plancherel_identity() {
        // int_0^inf (J0(a r) - J0(b r))^2 dr / r = ln(b / a).
        // Head by adaptive quadrature, tail by the Hankel machinery.
        let (a, b) = (2.0 * PI, 8.0 * PI); // R = 1, R' = 4
        let v: f64 = 12.0;
        assert!((b - a) * v >= MIN_PHASE);
        let head = {
            let spec = QuadratureSpec::with_tols(1e-12, 1e-12);
            let f = |r: f64| {
                let d = bessel_j(0, a * r) - bessel_j(0, b * r);
                d * d / r
            };
            // integrand ~ r^3 near 0: regular
            adaptive_integral_with_breaks(f, &breaks(0.0, v, 3.0 * b), &spec).unwrap()
        };
        let tail = bessel_product_tail(0, a, 0, a, 1, v).unwrap()
            + bessel_product_tail(0, b, 0, b, 1, v).unwrap()
            - 2.0 * bessel_product_tail(0, a, 0, b, 1, v).unwrap();
        let total = head + tail;
        assert_abs_diff_eq!(total, (b / a).ln(), epsilon = 1e-9);
    }

    #[test]
    fn single_square_tail_against_reference() {
        // int_v^inf J0(a r)^2 / r^3 dr, reference by quadrature.
        let (a, v) = (10.0, 6.0);
        let tail = bessel_product_tail(0, a, 0, a, 3, v).unwrap();
        let spec = QuadratureSpec::with_tols(1e-13, 1e-13);
        let f = |r: f64| bessel_j(0, a * r).powi(2) * r.powi(-3);
        let reference = adaptive_integral_with_breaks(f, &breaks(v, 2.0e4, 2.0), &spec).unwrap();
        assert_abs_diff_eq!(tail, reference, epsilon = 1e-8);
    }

    #[test]
    fn rejects_insufficient_phase() {
        assert!(bessel_product_tail(0, 1.0, 0, 1.05, 1, 10.0).is_err());
    }
}
