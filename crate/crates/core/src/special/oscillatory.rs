//! Oscillatory integrals `int_a^b e^{-i omega cos(theta)} f(theta) dtheta`
//! and the stationary-phase decay diagnostic built on them.

use crate::{c64, Complex64, Error, Result};
use std::f64::consts::PI;

// 10-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; symmetric).
const GL10_X: [f64; 5] = [
    0.148_874_338_981_631_22,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL10_W: [f64; 5] = [
    0.295_524_224_714_752_87,
    0.269_266_719_309_996_35,
    0.219_086_362_515_982_04,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_14,
];

/// Total node budget before the operation refuses to run.
const NODE_CAP: usize = 8_000_000;

/// `int_a^b e^{-i omega cos theta} f(theta) dtheta`.
///
/// Composite 10-point Gauss-Legendre with panels no longer than half an
/// oscillation period, which keeps at least 20 nodes per period of the
/// kernel (the phase varies by at most pi per panel).
pub fn oscillatory_integral<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    omega: f64,
) -> Result<Complex64> {
    if !(b >= a) {
        return Err(Error::parameter("oscillatory integral requires a <= b"));
    }
    if omega < 0.0 {
        return Err(Error::parameter("omega must be nonnegative"));
    }
    if a == b {
        return Ok(c64(0.0, 0.0));
    }
    // Quarter-period panels: phase varies by at most pi/2 per panel, which a
    // 10-point rule resolves to near machine precision, and the node density
    // is 40 per oscillation period.
    let panel_len = (0.5 * PI / omega.max(1.0)).min(b - a);
    let n_panels = ((b - a) / panel_len).ceil() as usize;
    if n_panels * 10 > NODE_CAP {
        return Err(Error::Accuracy {
            best: f64::NAN,
            err: f64::NAN,
        });
    }
    let h = (b - a) / n_panels as f64;
    let mut acc = c64(0.0, 0.0);
    for p in 0..n_panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut panel = c64(0.0, 0.0);
        for j in 0..5 {
            for sign in [-1.0, 1.0] {
                let theta = mid + sign * half * GL10_X[j];
                let phase = -omega * theta.cos();
                panel += GL10_W[j] * f(theta) * c64(phase.cos(), phase.sin());
            }
        }
        acc += panel * half;
    }
    Ok(acc)
}

/// One row of the stationary-phase diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct PhaseRatio {
    pub omega: f64,
    pub integral_abs: f64,
    /// `omega^{1/2} |integral| / (||f||_inf + ||f'||_1)`.
    pub ratio: f64,
}

/// Evaluate the normalized decay ratio over a grid of frequencies.
///
/// The norms of `f` are estimated on a fine uniform grid over `[a, b]`:
/// the sup norm directly, the `L^1` norm of `f'` by central differences.
pub fn stationary_phase_ratio<F: Fn(f64) -> f64 + Copy>(
    f: F,
    a: f64,
    b: f64,
    omega_grid: &[f64],
) -> Result<Vec<PhaseRatio>> {
    if omega_grid.iter().any(|&w| !(1.0..=1e4).contains(&w)) {
        return Err(Error::parameter("omega grid must lie within [1, 1e4]"));
    }
    let norm = norm_inf_plus_l1_derivative(f, a, b);
    if norm == 0.0 {
        return Err(Error::parameter("test function is identically zero"));
    }
    let mut out = Vec::with_capacity(omega_grid.len());
    for &omega in omega_grid {
        let integral = oscillatory_integral(f, a, b, omega)?;
        let iabs = integral.norm();
        out.push(PhaseRatio {
            omega,
            integral_abs: iabs,
            ratio: omega.sqrt() * iabs / norm,
        });
    }
    Ok(out)
}

fn norm_inf_plus_l1_derivative<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let n = 4096;
    let h = (b - a) / n as f64;
    let mut sup = 0.0f64;
    let mut l1 = 0.0f64;
    let mut prev = f(a);
    sup = sup.max(prev.abs());
    for j in 1..=n {
        let x = a + h * j as f64;
        let v = f(x);
        sup = sup.max(v.abs());
        l1 += (v - prev).abs();
        prev = v;
    }
    sup + l1
}

/// Least-squares slope of `log |I(omega)|` against `log omega`, with the
/// samples first aggregated into octave-bin root-mean-squares so the zeros of
/// the oscillating integral do not dominate the fit.
pub fn log_log_slope(rows: &[PhaseRatio]) -> f64 {
    let mut bins: Vec<(f64, f64, usize)> = Vec::new(); // (sum log w, sum |I|^2, count)
    let mut current_floor = f64::NEG_INFINITY;
    for row in rows {
        let octave = row.omega.log2().floor();
        if octave > current_floor {
            bins.push((0.0, 0.0, 0));
            current_floor = octave;
        }
        let last = bins.last_mut().unwrap();
        last.0 += row.omega.ln();
        last.1 += row.integral_abs * row.integral_abs;
        last.2 += 1;
    }
    let pts: Vec<(f64, f64)> = bins
        .iter()
        .filter(|&&(_, s, n)| n > 0 && s > 0.0)
        .map(|&(lw, s, n)| (lw / n as f64, 0.5 * (s / n as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel::bessel_j;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gl10_integrates_polynomials_exactly() {
        // Degree 19 is the exactness limit of the 10-point rule.
        let f = |x: f64| 1.0 + 3.0 * x.powi(7) - 2.0 * x.powi(19);
        let mut acc = 0.0;
        for j in 0..5 {
            acc += GL10_W[j] * (f(GL10_X[j]) + f(-GL10_X[j]));
        }
        // int_{-1}^{1} f = 2 (odd powers vanish)
        assert_abs_diff_eq!(acc, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn full_circle_reduces_to_bessel() {
        for &omega in &[1.0, 7.5, 50.0] {
            let v = oscillatory_integral(|_| 1.0, 0.0, 2.0 * PI, omega).unwrap();
            assert_abs_diff_eq!(v.re, 2.0 * PI * bessel_j(0, omega), epsilon = 1e-10);
            assert!(v.im.abs() < 1e-10, "imaginary part should vanish");
        }
    }

    #[test]
    fn zero_integrand() {
        let v = oscillatory_integral(|_| 0.0, 0.0, 2.0 * PI, 17.0).unwrap();
        assert_eq!(v, c64(0.0, 0.0));
    }

    #[test]
    fn matches_brute_force_trapezoid() {
        // f = cos(theta), omega = 50, against a 10^6-node trapezoid.
        let omega = 50.0;
        let (a, b) = (0.0, 2.0 * PI);
        let n = 1_000_000usize;
        let h = (b - a) / n as f64;
        let mut brute = c64(0.0, 0.0);
        for j in 0..n {
            let theta = a + h * j as f64; // periodic integrand: plain mean
            let phase = -omega * theta.cos();
            brute += theta.cos() * c64(phase.cos(), phase.sin());
        }
        brute *= h;
        let v = oscillatory_integral(|t| t.cos(), a, b, omega).unwrap();
        assert!((v - brute).norm() < 1e-8, "diff {:.3e}", (v - brute).norm());
    }

    #[test]
    fn kernel_symmetry_under_half_turn() {
        // Shifting theta by pi flips the sign of cos(theta), so the integral
        // over a full period conjugates.
        let omega = 13.0;
        let f = |t: f64| 1.0 + 0.5 * (2.0 * t).sin();
        let v = oscillatory_integral(f, 0.0, 2.0 * PI, omega).unwrap();
        let shifted = oscillatory_integral(|t| f(t + PI), 0.0, 2.0 * PI, omega).unwrap();
        assert!((shifted.conj() - v).norm() < 1e-9);
    }

    #[test]
    fn rejects_omega_outside_grid_range() {
        let err = stationary_phase_ratio(|_| 1.0, 0.0, 1.0, &[0.5]);
        assert!(err.is_err());
    }
}
