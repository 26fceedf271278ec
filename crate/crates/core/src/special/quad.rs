//! Adaptive quadrature for the radial integrals behind the spectral oracles.
//!
//! The workhorse is the classical G7-K15 Gauss-Kronrod pair with adaptive
//! bisection. Radial integrals `int f(r) 2 pi r dr` add two policies on top:
//! an interval-doubling rule for improper upper limits and a dyadic-block
//! divergence detector at a singular lower endpoint.

use crate::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Tolerances and singularity policy for a radial integral.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Expected blow-up exponent at the lower endpoint: the integrand may
    /// grow like `r^{-p}`. Against the area element `r dr`, `p < 2` is
    /// integrable; `p >= 2` switches `radial_integral` into
    /// divergence-detection mode.
    pub singularity_exponent: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 20_000,
            singularity_exponent: 0.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tols(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    pub fn divergence_mode(mut self, exponent: f64) -> Self {
        self.singularity_exponent = exponent;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::parameter("quadrature tolerances must be positive"));
        }
        Ok(())
    }
}

/// Outcome of an improper/singular radial integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialOutcome {
    Finite(f64),
    Diverges,
}

impl RadialOutcome {
    pub fn finite(self) -> Option<f64> {
        match self {
            RadialOutcome::Finite(v) => Some(v),
            RadialOutcome::Diverges => None,
        }
    }
}

// G7-K15 nodes and weights (Kronrod extension of 7-point Gauss-Legendre).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7-K15 panel; returns (kronrod value, error estimate).
///
/// The error estimate follows the QUADPACK sharpening: the raw `|K - G|`
/// difference is rescaled against the total deviation `resasc`, which keeps
/// it honest on panels containing near-singular behavior where both rules
/// err in the same direction.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(mid - x);
        let f2 = f(mid + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    resasc *= half.abs();
    kronrod *= half;
    gauss *= half;
    let raw = (kronrod - gauss).abs();
    let err = if resasc != 0.0 && raw != 0.0 {
        resasc * 1.0f64.min((200.0 * raw / resasc).powf(1.5))
    } else {
        raw
    };
    (kronrod, err)
}

struct Panel {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

/// Adaptive G7-K15 on a finite interval with caller-supplied breakpoints.
///
/// Breakpoints let oscillatory integrands start from frequency-sized panels
/// instead of forcing the subdivision logic to discover the scale.
pub fn adaptive_integral_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    if breaks.len() < 2 {
        return Err(Error::parameter("need at least two breakpoints"));
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let (v, e) = gauss_kronrod_15(&f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Panel {
            err: e,
            a: w[0],
            b: w[1],
            value: v,
        });
    }
    let mut subdivisions = 0;
    while total_err > spec.abs_tol.max(spec.rel_tol * total.abs()) {
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Accuracy {
                best: total,
                err: total_err,
            });
        }
        let worst = heap.pop().expect("heap cannot be empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; accept its estimate.
            continue;
        }
        let (v1, e1) = gauss_kronrod_15(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel {
            err: e1,
            a: worst.a,
            b: mid,
            value: v1,
        });
        heap.push(Panel {
            err: e2,
            a: mid,
            b: worst.b,
            value: v2,
        });
        subdivisions += 1;
    }
    Ok(total)
}

/// Adaptive G7-K15 on `[a, b]`.
pub fn adaptive_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    adaptive_integral_with_breaks(f, &[a, b], spec)
}

/// `int_{r_min}^{r_max} f(r) 2 pi r dr` for a radial density `f`.
///
/// `r_max = f64::INFINITY` is allowed: the integral is extended by doubling
/// segments until both the last segment and the integrand envelope fall below
/// the absolute tolerance. A singular lower endpoint (`r_min = 0` with
/// `singularity_exponent >= 2`) switches to dyadic divergence detection per
/// the spec of [`QuadratureSpec`].
pub fn radial_integral<F: Fn(f64) -> f64>(
    f: F,
    r_min: f64,
    r_max: f64,
    spec: &QuadratureSpec,
) -> Result<RadialOutcome> {
    spec.validate()?;
    if !(r_min >= 0.0) || r_max < r_min {
        return Err(Error::parameter("radial bounds must satisfy 0 <= r_min <= r_max"));
    }
    let g = |r: f64| f(r) * 2.0 * PI * r;

    let mut total = 0.0;

    // Singular lower endpoint handling.
    let mut lo = r_min;
    if spec.singularity_exponent >= 2.0 {
        if r_min != 0.0 {
            return Err(Error::parameter(
                "divergence-detection mode expects the singularity at r_min = 0",
            ));
        }
        let r1 = if r_max.is_finite() { r_max.min(1.0) } else { 1.0 };
        match dyadic_blocks_toward_zero(&g, r1, spec)? {
            RadialOutcome::Diverges => return Ok(RadialOutcome::Diverges),
            RadialOutcome::Finite(v) => {
                total += v;
                lo = r1;
            }
        }
        if lo >= r_max {
            return Ok(RadialOutcome::Finite(total));
        }
    }

    if r_max.is_finite() {
        total += adaptive_integral(&g, lo, r_max, spec)?;
        return Ok(RadialOutcome::Finite(total));
    }

    // Improper upper limit: doubling segments with an envelope stop rule.
    let mut a = lo;
    let mut len = (lo.max(1.0)).max(1.0);
    let seg_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / 8.0,
        ..spec.clone()
    };
    for _ in 0..64 {
        let b = a + len;
        let seg = adaptive_integral(&g, a, b, &seg_spec)?;
        total += seg;
        // Envelope rule: stop once the last segment is negligible and the
        // integrand at the far end, extended like a 1/r^2 envelope, cannot
        // contribute more than the tolerance.
        let tail_bound = g(b).abs() * b;
        if seg.abs() <= spec.abs_tol / 8.0 && tail_bound <= spec.abs_tol / 8.0 {
            return Ok(RadialOutcome::Finite(total));
        }
        a = b;
        len *= 2.0;
    }
    Err(Error::Accuracy {
        best: total,
        err: f64::NAN,
    })
}

/// Integrate `g` over dyadic blocks `[r1 2^{-k-1}, r1 2^{-k}]` toward zero.
///
/// For `g ~ r^{1-p}` the block sequence is geometric with ratio `2^{p-2}`:
/// decaying when the integral converges, flat or growing when it diverges.
/// The detector combines the block-ratio trend with the hard cap that
/// partial sums must not exceed 1e6 times the first block.
fn dyadic_blocks_toward_zero<G: Fn(f64) -> f64>(
    g: &G,
    r1: f64,
    spec: &QuadratureSpec,
) -> Result<RadialOutcome> {
    let block_spec = QuadratureSpec {
        abs_tol: (spec.abs_tol / 100.0).max(1e-300),
        rel_tol: spec.rel_tol,
        max_subdivisions: spec.max_subdivisions,
        singularity_exponent: 0.0,
    };
    let mut sum = 0.0;
    let mut prev_block: Option<f64> = None;
    let mut first_block_abs = 0.0;
    let mut flat_streak = 0;
    let mut hi = r1;
    for k in 0..200 {
        let lo = hi * 0.5;
        let block = adaptive_integral(g, lo, hi, &block_spec)?;
        sum += block;
        if k == 0 {
            first_block_abs = block.abs().max(1e-300);
        }
        if sum.abs() > 1e6 * first_block_abs {
            return Ok(RadialOutcome::Diverges);
        }
        if let Some(prev) = prev_block {
            let ratio = if prev.abs() > 0.0 { block.abs() / prev.abs() } else { 0.0 };
            if ratio >= 0.95 && block.abs() > spec.abs_tol / 1e3 {
                flat_streak += 1;
                if flat_streak >= 8 {
                    return Ok(RadialOutcome::Diverges);
                }
            } else {
                flat_streak = 0;
            }
            // Converged: geometric extrapolation of the remaining blocks.
            if block.abs() < spec.abs_tol / 10.0 && ratio < 0.9 {
                let tail = block.abs() * ratio / (1.0 - ratio);
                if tail < spec.abs_tol / 10.0 {
                    return Ok(RadialOutcome::Finite(sum));
                }
            }
        }
        prev_block = Some(block);
        hi = lo;
    }
    // 200 halvings reach r ~ 1e-60; treat an undecided trend as divergent
    // only if blocks are still substantial.
    if prev_block.map(|b| b.abs() > spec.abs_tol).unwrap_or(false) {
        Ok(RadialOutcome::Diverges)
    } else {
        Ok(RadialOutcome::Finite(sum))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::with_tols(1e-11, 1e-11)
    }

    #[test]
    fn gaussian_normalization() {
        // int e^{-pi r^2} 2 pi r dr = 1
        let v = radial_integral(|r| (-PI * r * r).exp(), 0.0, f64::INFINITY, &spec())
            .unwrap()
            .finite()
            .unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn inverse_square_diverges_at_origin() {
        let s = spec().divergence_mode(2.0);
        let v = radial_integral(|r| 1.0 / (r * r), 0.0, 1.0, &s).unwrap();
        assert_eq!(v, RadialOutcome::Diverges);
    }

    #[test]
    fn inverse_quartic_tail() {
        // int_1^inf r^{-4} 2 pi r dr = pi
        let v = radial_integral(|r| r.powi(-4), 1.0, f64::INFINITY, &spec())
            .unwrap()
            .finite()
            .unwrap();
        assert_abs_diff_eq!(v, PI, epsilon = 1e-8);
    }

    #[test]
    fn integrable_singularity_in_convergent_mode() {
        // f = r^{-1.5}: int_0^1 r^{-1.5} 2 pi r dr = 2 pi int_0^1 r^{-1/2} dr = 4 pi
        let s = QuadratureSpec {
            singularity_exponent: 1.5,
            ..spec()
        };
        let v = radial_integral(|r| r.powf(-1.5), 0.0, 1.0, &s).unwrap().finite().unwrap();
        assert_abs_diff_eq!(v, 4.0 * PI, epsilon = 1e-7);
    }

    #[test]
    fn additivity_over_splits() {
        let f = |r: f64| (1.0 + r * r).recip();
        let whole = radial_integral(f, 0.0, 3.0, &spec()).unwrap().finite().unwrap();
        let left = radial_integral(f, 0.0, 1.3, &spec()).unwrap().finite().unwrap();
        let right = radial_integral(f, 1.3, 3.0, &spec()).unwrap().finite().unwrap();
        assert_abs_diff_eq!(whole, left + right, epsilon = 2e-11);
    }

    #[test]
    fn accuracy_error_carries_best_estimate() {
        let tight = QuadratureSpec {
            abs_tol: 1e-15,
            rel_tol: 1e-16,
            max_subdivisions: 3,
            singularity_exponent: 0.0,
        };
        let err = adaptive_integral(|x: f64| (10.0 * x).sin().abs(), 0.0, 7.0, &tight).unwrap_err();
        match err {
            Error::Accuracy { best, .. } => assert!(best.is_finite()),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn oscillatory_finite_interval() {
        // int_0^1 cos(40 x) dx = sin(40)/40
        let v = adaptive_integral(|x: f64| (40.0 * x).cos(), 0.0, 1.0, &spec()).unwrap();
        assert_abs_diff_eq!(v, (40.0f64).sin() / 40.0, epsilon = 1e-11);
    }
}
