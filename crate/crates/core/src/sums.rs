//! Truncated reciprocal sums over a realization and differences over lunar
//! domains (symmetric differences of equal-radius disks).
//!
//! Sums run over 10^4-10^6 terms of mixed sign, and downstream acceptance
//! tolerances are percent-level on variances of small quantities, so all
//! accumulation is compensated (Neumaier error-free transform).

use crate::pointproc::PointConfiguration;
use crate::{c64, Complex64, Error, Result};

/// Neumaier-compensated scalar accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn add(&mut self, term: Complex64) {
        self.re.add(term.re);
        self.im.add(term.im);
    }

    pub fn value(&self) -> Complex64 {
        c64(self.re.value(), self.im.value())
    }
}

fn check_truncation(config: &PointConfiguration, r: f64) -> Result<()> {
    if !(r >= 1.0) {
        return Err(Error::parameter("truncation radius must satisfy R >= 1"));
    }
    if r > config.window_radius + 1e-12 {
        return Err(Error::window(format!(
            "truncation radius {r} exceeds window radius {}",
            config.window_radius
        )));
    }
    Ok(())
}

/// `sum over 1 <= |p| <= R of p^{-ell}` for `ell` in `{1, 2}`.
///
/// Points within 1e-12 of the truncation circle count as inside iff
/// `|p| <= R` (closed ball); ties almost surely never occur but determinism
/// requires a fixed rule.
pub fn psi_sum(config: &PointConfiguration, ell: u32, r: f64) -> Result<Complex64> {
    if !(ell == 1 || ell == 2) {
        return Err(Error::parameter("reciprocal sum order must be 1 or 2"));
    }
    check_truncation(config, r)?;
    let mut acc = ComplexSum::default();
    for p in &config.points {
        let norm = p.norm();
        if !(1.0..=r).contains(&norm) {
            continue;
        }
        let inv = p.inv();
        acc.add(if ell == 1 { inv } else { inv * inv });
    }
    Ok(acc.value())
}

/// `sum over 1 <= |p| <= R of |p|^{-3}` (absolutely convergent companion sum).
pub fn psi3_abs_sum(config: &PointConfiguration, r: f64) -> Result<f64> {
    check_truncation(config, r)?;
    let mut acc = CompensatedSum::default();
    for p in &config.points {
        let norm = p.norm();
        if (1.0..=r).contains(&norm) {
            acc.add(norm.powi(-3));
        }
    }
    Ok(acc.value())
}

/// Difference of truncated pole sums over disks centered at `u` and `v`,
/// with the deterministic recentering drift:
///
/// `sum_{|p-u|<=R} 1/(z-p) - sum_{|p-v|<=R} 1/(z-p) + pi c (conj(u) - conj(v))`
///
/// Points inside both disks cancel exactly and are never evaluated, so only
/// the lunar region contributes; this also makes the u <-> v antisymmetry
/// exact per realization.
pub fn lunar_difference(
    config: &PointConfiguration,
    u: Complex64,
    v: Complex64,
    z: Complex64,
    r: f64,
) -> Result<Complex64> {
    if !(r >= 1.0) {
        return Err(Error::parameter("truncation radius must satisfy R >= 1"));
    }
    let reach = u.norm().max(v.norm()) + z.norm() + r;
    if reach > config.window_radius + 1e-12 {
        return Err(Error::window(format!(
            "lunar evaluation reach {reach} exceeds window radius {}",
            config.window_radius
        )));
    }
    let mut acc = ComplexSum::default();
    for p in &config.points {
        let in_u = (p - u).norm() <= r;
        let in_v = (p - v).norm() <= r;
        if in_u == in_v {
            continue;
        }
        let denom = z - p;
        if denom.norm() < 1e-9 {
            return Err(Error::PoleProximity {
                dist: denom.norm(),
                pole_re: p.re,
                pole_im: p.im,
            });
        }
        let term = denom.inv();
        acc.add(if in_u { term } else { -term });
    }
    let drift = std::f64::consts::PI * config.cond_intensity * (u - v).conj();
    Ok(acc.value() + drift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::{sample_shifted_lattice, shifted_lattice_with_shift};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fixture(points: Vec<Complex64>, window: f64, intensity: f64) -> PointConfiguration {
        PointConfiguration {
            points,
            window_radius: window,
            model_id: "fixture".into(),
            cond_intensity: intensity,
            extras: Default::default(),
        }
    }

    #[test]
    fn empty_configuration_sums_to_zero() {
        let config = fixture(vec![], 10.0, 0.0);
        assert_eq!(psi_sum(&config, 1, 5.0).unwrap(), c64(0.0, 0.0));
        assert_eq!(psi_sum(&config, 2, 5.0).unwrap(), c64(0.0, 0.0));
        assert_eq!(psi3_abs_sum(&config, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn pure_lattice_cancellation_by_symmetry() {
        // Unshifted integer lattice: psi_1 vanishes by central symmetry and
        // psi_2 by quarter-turn symmetry, up to compensated roundoff.
        let config = shifted_lattice_with_shift(c64(0.0, 0.0), 24.0).unwrap();
        for (ell, r) in [(1u32, 8.0), (1, 20.0), (2, 8.0), (2, 20.0)] {
            let v = psi_sum(&config, ell, r).unwrap();
            assert!(v.norm() < 1e-13, "ell={ell}, R={r}: {v}");
        }
    }

    #[test]
    fn single_point_psi3() {
        let config = fixture(vec![c64(2.0, 0.0)], 4.0, 0.0);
        assert_abs_diff_eq!(psi3_abs_sum(&config, 3.0).unwrap(), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn window_violations_are_rejected() {
        let config = fixture(vec![c64(1.0, 0.0)], 4.0, 0.0);
        assert!(psi_sum(&config, 1, 5.0).is_err());
        assert!(psi_sum(&config, 1, 0.5).is_err());
        assert!(lunar_difference(&config, c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), 3.5).is_err());
    }

    #[test]
    fn lunar_difference_trivial_and_antisymmetric() {
        let config = sample_shifted_lattice(40.0, 3).unwrap();
        let (u, v, z) = (c64(1.0, 0.0), c64(0.0, 0.0), c64(0.3, 0.0));
        let same = lunar_difference(&config, u, u, z, 16.0).unwrap();
        assert_eq!(same, c64(0.0, 0.0));
        let forward = lunar_difference(&config, u, v, z, 16.0).unwrap();
        let backward = lunar_difference(&config, v, u, z, 16.0).unwrap();
        assert_eq!(forward, -backward);
    }

    #[test]
    fn lattice_lunar_difference_is_cauchy_in_radius() {
        // Deterministic convergence fixture: same seed, growing radii.
        let config = sample_shifted_lattice(66.0, 11).unwrap();
        let (u, v, z) = (c64(1.0, 0.0), c64(0.0, 0.0), c64(0.3, 0.0));
        let d32 = lunar_difference(&config, u, v, z, 32.0).unwrap();
        let d64 = lunar_difference(&config, u, v, z, 64.0).unwrap();
        assert!((d64 - d32).norm() <= 0.05, "gap {}", (d64 - d32).norm());
        assert!(d64.norm() < 10.0);
    }

    proptest! {
        #[test]
        fn centrally_symmetric_fixtures_cancel(
            seeds in proptest::collection::vec((0.5f64..6.0, 0.0f64..std::f64::consts::TAU), 1..40)
        ) {
            // points come in +/- pairs: the psi_1 terms cancel pairwise
            let mut points = Vec::new();
            for (r, theta) in seeds {
                let p = c64(r * theta.cos(), r * theta.sin());
                points.push(p);
                points.push(-p);
            }
            let config = fixture(points, 8.0, 0.0);
            let v = psi_sum(&config, 1, 7.0).unwrap();
            prop_assert!(v.norm() < 1e-12, "psi1 = {}", v);
        }

        #[test]
        fn quarter_turn_fixtures_cancel_psi2(
            seeds in proptest::collection::vec((0.5f64..6.0, 0.0f64..std::f64::consts::TAU), 1..25)
        ) {
            // four-fold symmetric points: 1/(i p)^2 = -1/p^2 cancels pairwise
            let rot = c64(0.0, 1.0);
            let mut points = Vec::new();
            for (r, theta) in seeds {
                let mut p = c64(r * theta.cos(), r * theta.sin());
                for _ in 0..4 {
                    points.push(p);
                    p *= rot;
                }
            }
            let config = fixture(points, 8.0, 0.0);
            let v = psi_sum(&config, 2, 7.0).unwrap();
            prop_assert!(v.norm() < 1e-12, "psi2 = {}", v);
        }
    }
}
