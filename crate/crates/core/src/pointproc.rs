//! Seeded samplers producing finite windowed realizations of the supported
//! stationary planar point processes.
//!
//! Every sampler is a pure function of its parameters and a 64-bit seed; the
//! same seed reproduces the identical configuration bit for bit. Points are
//! returned sorted by (re, im) so equality of realizations is well defined.

use crate::{c64, Complex64, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Descriptor of a process family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProcessModel {
    Poisson { intensity: f64 },
    CoxTwoPoisson { c1: f64, c2: f64, p: f64 },
    ShiftedLattice,
    PerturbedLattice { a: f64 },
    Ginibre { n: usize },
    GefZeros { keep_radius: f64 },
}

impl ProcessModel {
    /// Mean number of points per unit area.
    pub fn intensity(&self) -> f64 {
        match self {
            ProcessModel::Poisson { intensity } => *intensity,
            ProcessModel::CoxTwoPoisson { c1, c2, p } => p * c1 + (1.0 - p) * c2,
            ProcessModel::ShiftedLattice | ProcessModel::PerturbedLattice { .. } => 1.0,
            ProcessModel::Ginibre { .. } | ProcessModel::GefZeros { .. } => 1.0 / PI,
        }
    }

    /// Whether the conditional intensity is deterministic (ergodic case).
    pub fn is_ergodic(&self) -> bool {
        !matches!(self, ProcessModel::CoxTwoPoisson { .. })
    }

    pub fn label(&self) -> String {
        match self {
            ProcessModel::Poisson { intensity } => format!("poisson(c={intensity})"),
            ProcessModel::CoxTwoPoisson { c1, c2, p } => format!("cox(c1={c1},c2={c2},p={p})"),
            ProcessModel::ShiftedLattice => "shifted_lattice".into(),
            ProcessModel::PerturbedLattice { a } => format!("perturbed_lattice(a={a})"),
            ProcessModel::Ginibre { n } => format!("ginibre(n={n})"),
            ProcessModel::GefZeros { keep_radius } => format!("gef_zeros(r={keep_radius})"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessModel::Poisson { intensity } => {
                if !(*intensity > 0.0) {
                    return Err(Error::parameter("poisson intensity must be positive"));
                }
            }
            ProcessModel::CoxTwoPoisson { c1, c2, p } => {
                if !(*c1 > 0.0 && *c2 > 0.0) {
                    return Err(Error::parameter("cox intensities must be positive"));
                }
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::parameter("mixture weight p must lie in [0, 1]"));
                }
            }
            ProcessModel::ShiftedLattice => {}
            ProcessModel::PerturbedLattice { a } => {
                if !(*a >= 0.0) {
                    return Err(Error::parameter("perturbation variance must be nonnegative"));
                }
            }
            ProcessModel::Ginibre { n } => {
                if *n < 1 {
                    return Err(Error::parameter("ginibre matrix size must be >= 1"));
                }
            }
            ProcessModel::GefZeros { keep_radius } => {
                if !(*keep_radius >= 1.0 && *keep_radius <= 8.0) {
                    return Err(Error::parameter(
                        "gef keep radius must lie in [1, 8] (truncation degree grows like 12 r^2)",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Sample one realization. `window_radius` applies to the windowed
    /// families; Ginibre and GEF zeros carry their own intrinsic windows.
    pub fn sample(&self, window_radius: f64, seed: u64) -> Result<PointConfiguration> {
        match self {
            ProcessModel::Poisson { intensity } => sample_poisson(*intensity, window_radius, seed),
            ProcessModel::CoxTwoPoisson { c1, c2, p } => {
                sample_cox_two_poisson(*c1, *c2, *p, window_radius, seed)
            }
            ProcessModel::ShiftedLattice => sample_shifted_lattice(window_radius, seed),
            ProcessModel::PerturbedLattice { a } => sample_perturbed_lattice(*a, window_radius, seed),
            #[cfg(feature = "eigen")]
            ProcessModel::Ginibre { n } => sample_ginibre(*n, seed),
            #[cfg(feature = "eigen")]
            ProcessModel::GefZeros { keep_radius } => sample_gef_zeros(*keep_radius, seed),
            #[cfg(not(feature = "eigen"))]
            ProcessModel::Ginibre { .. } | ProcessModel::GefZeros { .. } => Err(
                Error::UnsupportedModel("eigenvalue-based samplers need the `eigen` feature".into()),
            ),
        }
    }
}

/// Auxiliary per-realization data carried alongside the point set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigExtras {
    /// Edge-safe statistics radius for finite-size ensembles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub usable_radius: Option<f64>,
    /// The uniform shift of lattice-based realizations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_shift: Option<(f64, f64)>,
    /// Largest residual of the truncated series at a returned root.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gef_max_residual: Option<f64>,
    /// Number of rejection re-draws that were needed (duplicates, underflow).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub redraws: u32,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

/// One realization: a finite set of points in a disk window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration {
    pub points: Vec<Complex64>,
    pub window_radius: f64,
    pub model_id: String,
    /// The realization's conditional intensity: equals the model intensity
    /// for ergodic models, the sampled mixture component for Cox models.
    pub cond_intensity: f64,
    #[serde(default)]
    pub extras: ConfigExtras,
}

impl PointConfiguration {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Statistics window: the recorded usable radius if present, else the
    /// full window.
    pub fn usable_radius(&self) -> f64 {
        self.extras.usable_radius.unwrap_or(self.window_radius)
    }

    pub fn count_in_disk(&self, center: Complex64, radius: f64) -> usize {
        self.points.iter().filter(|p| (*p - center).norm() <= radius).count()
    }

    fn canonicalize(&mut self) {
        self.points
            .sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    }

    fn has_duplicates(&self) -> bool {
        self.points.windows(2).any(|w| w[0] == w[1])
    }
}

/// Deterministic seed splitter (SplitMix64 over seed and stream index).
pub fn split_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn standard_complex_gaussian(rng: &mut ChaCha8Rng, total_variance: f64) -> Complex64 {
    // Components are N(0, total_variance / 2) so E|Z|^2 = total_variance.
    let sigma = (total_variance * 0.5).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c64(re * sigma, im * sigma)
}

fn uniform_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = 2.0 * PI * rng.gen::<f64>();
    c64(r * theta.cos(), r * theta.sin())
}

fn validate_window(window_radius: f64) -> Result<()> {
    if !(window_radius > 0.0 && window_radius.is_finite()) {
        return Err(Error::parameter("window radius must be positive and finite"));
    }
    Ok(())
}

fn finish(
    mut config: PointConfiguration,
    resample: impl Fn(u64) -> Result<PointConfiguration>,
) -> Result<PointConfiguration> {
    config.canonicalize();
    // All supported models are almost surely simple; a duplicate indicates a
    // degenerate draw and triggers a deterministic re-draw with a sub-seed.
    let mut attempt = 0u64;
    while config.has_duplicates() {
        attempt += 1;
        if attempt > 4 {
            return Err(Error::numeric("persistent duplicate points across re-draws"));
        }
        let mut redrawn = resample(attempt)?;
        redrawn.canonicalize();
        redrawn.extras.redraws = attempt as u32;
        config = redrawn;
    }
    Ok(config)
}

/// Homogeneous Poisson process in a disk window.
pub fn sample_poisson(intensity: f64, window_radius: f64, seed: u64) -> Result<PointConfiguration> {
    ProcessModel::Poisson { intensity }.validate()?;
    validate_window(window_radius)?;
    let build = |sub: u64| -> Result<PointConfiguration> {
        let mut rng = rng_for(split_seed(seed, sub));
        let mean = intensity * PI * window_radius * window_radius;
        let count = Poisson::new(mean)
            .map_err(|e| Error::parameter(format!("invalid poisson mean: {e}")))?
            .sample(&mut rng) as usize;
        let points = (0..count).map(|_| uniform_in_disk(&mut rng, window_radius)).collect();
        Ok(PointConfiguration {
            points,
            window_radius,
            model_id: ProcessModel::Poisson { intensity }.label(),
            cond_intensity: intensity,
            extras: ConfigExtras::default(),
        })
    };
    finish(build(0)?, build)
}

/// Mixture of two Poisson intensities: a Cox process whose conditional
/// intensity is random.
pub fn sample_cox_two_poisson(
    c1: f64,
    c2: f64,
    p: f64,
    window_radius: f64,
    seed: u64,
) -> Result<PointConfiguration> {
    let model = ProcessModel::CoxTwoPoisson { c1, c2, p };
    model.validate()?;
    validate_window(window_radius)?;
    let build = |sub: u64| -> Result<PointConfiguration> {
        let mut rng = rng_for(split_seed(seed, sub));
        let chosen = if rng.gen::<f64>() < p { c1 } else { c2 };
        let mean = chosen * PI * window_radius * window_radius;
        let count = Poisson::new(mean)
            .map_err(|e| Error::parameter(format!("invalid poisson mean: {e}")))?
            .sample(&mut rng) as usize;
        let points = (0..count).map(|_| uniform_in_disk(&mut rng, window_radius)).collect();
        Ok(PointConfiguration {
            points,
            window_radius,
            model_id: model.label(),
            cond_intensity: chosen,
            extras: ConfigExtras::default(),
        })
    };
    finish(build(0)?, build)
}

/// Lattice `Z^2 + u` with a fixed, known shift. Useful as a deterministic
/// fixture; the seeded sampler below draws the shift uniformly.
pub fn shifted_lattice_with_shift(u: Complex64, window_radius: f64) -> Result<PointConfiguration> {
    validate_window(window_radius)?;
    if window_radius < 1.0 {
        return Err(Error::parameter("lattice windows need radius >= 1"));
    }
    let mut points = Vec::new();
    let bound = window_radius.ceil() as i64 + 1;
    for i in -bound..=bound {
        for j in -bound..=bound {
            let p = c64(i as f64 + u.re, j as f64 + u.im);
            if p.norm() <= window_radius {
                points.push(p);
            }
        }
    }
    let mut config = PointConfiguration {
        points,
        window_radius,
        model_id: ProcessModel::ShiftedLattice.label(),
        cond_intensity: 1.0,
        extras: ConfigExtras {
            lattice_shift: Some((u.re, u.im)),
            ..Default::default()
        },
    };
    config.canonicalize();
    Ok(config)
}

/// Uniformly shifted integer lattice restricted to the window.
pub fn sample_shifted_lattice(window_radius: f64, seed: u64) -> Result<PointConfiguration> {
    let mut rng = rng_for(split_seed(seed, 0));
    let u = c64(rng.gen::<f64>(), rng.gen::<f64>());
    shifted_lattice_with_shift(u, window_radius)
}

/// Gaussian-perturbed shifted lattice: points `nu + zeta_nu + u` with
/// `E|zeta|^2 = a`.
///
/// Sites are generated inside the window plus a guard band of `6 sqrt(a) + 1`
/// and the resulting points clipped to the window, so border effects from
/// migrating points are negligible.
pub fn sample_perturbed_lattice(a: f64, window_radius: f64, seed: u64) -> Result<PointConfiguration> {
    let model = ProcessModel::PerturbedLattice { a };
    model.validate()?;
    validate_window(window_radius)?;
    if window_radius < 1.0 {
        return Err(Error::parameter("lattice windows need radius >= 1"));
    }
    let mut rng = rng_for(split_seed(seed, 0));
    let u = c64(rng.gen::<f64>(), rng.gen::<f64>());
    let guard = 6.0 * a.sqrt() + 1.0;
    let bound = (window_radius + guard).ceil() as i64 + 1;
    let mut points = Vec::new();
    for i in -bound..=bound {
        for j in -bound..=bound {
            let site = c64(i as f64 + u.re, j as f64 + u.im);
            // Every site whose point could land in the window gets a draw;
            // the rng consumption order is part of the determinism contract.
            if site.norm() > window_radius + guard {
                continue;
            }
            let p = site + standard_complex_gaussian(&mut rng, a);
            if p.norm() <= window_radius {
                points.push(p);
            }
        }
    }
    let mut config = PointConfiguration {
        points,
        window_radius,
        model_id: model.label(),
        cond_intensity: 1.0,
        extras: ConfigExtras {
            lattice_shift: Some((u.re, u.im)),
            ..Default::default()
        },
    };
    config.canonicalize();
    Ok(config)
}

/// Edge margin for finite-size Ginibre statistics. Spectral-radius
/// fluctuations of the finite ensemble have width of order `sqrt(log n)`
/// around `sqrt(n)`; five times that keeps bulk statistics clean.
pub fn ginibre_usable_radius(n: usize) -> f64 {
    let n_f = n as f64;
    (n_f.sqrt() - 5.0 * n_f.ln().max(1.0).sqrt()).max(0.0)
}

/// Eigenvalues of an `n x n` matrix with i.i.d. standard complex Gaussian
/// entries (`E|entry|^2 = 1`). The bulk density is `1/pi` inside radius
/// `sqrt(n)`.
#[cfg(feature = "eigen")]
pub fn sample_ginibre(n: usize, seed: u64) -> Result<PointConfiguration> {
    let model = ProcessModel::Ginibre { n };
    model.validate()?;
    let build = |sub: u64| -> Result<PointConfiguration> {
        let mut rng = rng_for(split_seed(seed, sub));
        let mut a: Vec<Complex64> = (0..n * n)
            .map(|_| standard_complex_gaussian(&mut rng, 1.0))
            .collect();
        let points = crate::linalg::complex_eigenvalues(&mut a, n)
            .map_err(|e| Error::numeric(format!("ginibre eigensolver failed (seed {seed}): {e}")))?;
        Ok(PointConfiguration {
            points,
            window_radius: (n as f64).sqrt(),
            model_id: model.label(),
            cond_intensity: 1.0 / PI,
            extras: ConfigExtras {
                usable_radius: Some(ginibre_usable_radius(n)),
                ..Default::default()
            },
        })
    };
    finish(build(0)?, build)
}

/// Truncation degree of the random Taylor series used for GEF zeros. Terms
/// `z^n / sqrt(n!)` decay super-exponentially once `n` exceeds `e |z|^2`;
/// the factor 12 leaves a wide margin.
pub fn gef_truncation_degree(keep_radius: f64) -> usize {
    (12.0 * keep_radius * keep_radius).ceil() as usize + 64
}

/// Zeros of the truncated random Taylor series `sum zeta_n z^n / sqrt(n!)`
/// inside the disk of radius `keep_radius`, found as companion-matrix
/// eigenvalues of the rescaled polynomial and polished by Newton steps.
#[cfg(feature = "eigen")]
pub fn sample_gef_zeros(keep_radius: f64, seed: u64) -> Result<PointConfiguration> {
    let model = ProcessModel::GefZeros { keep_radius };
    model.validate()?;
    let degree = gef_truncation_degree(keep_radius);

    let mut attempt = 0u64;
    loop {
        let mut rng = rng_for(split_seed(seed, attempt));
        let coeffs: Vec<Complex64> = (0..=degree)
            .map(|_| standard_complex_gaussian(&mut rng, 1.0))
            .collect();

        match gef_roots_in_disk(&coeffs, keep_radius) {
            Ok((mut points, max_residual)) => {
                points.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
                let config = PointConfiguration {
                    points,
                    window_radius: keep_radius,
                    model_id: model.label(),
                    cond_intensity: 1.0 / PI,
                    extras: ConfigExtras {
                        gef_max_residual: Some(max_residual),
                        redraws: attempt as u32,
                        ..Default::default()
                    },
                };
                if config.has_duplicates() {
                    attempt += 1;
                } else {
                    return Ok(config);
                }
            }
            Err(Error::Numeric(msg)) if msg.contains("underflow") => {
                // Leading-coefficient underflow: re-draw with a sub-seed.
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
        if attempt > 8 {
            return Err(Error::numeric("gef sampler exceeded re-draw budget"));
        }
    }
}

/// Roots of `sum_n coeffs[n] z^n / sqrt(n!)` with `|z| <= keep_radius`.
///
/// The substitution `z = keep_radius * w` normalizes the huge dynamic range
/// of `1/sqrt(n!)`; scaled coefficients more than ~220 decades below the
/// largest one are trimmed (they cannot move roots in the unit `w`-disk at
/// the residual tolerance), and the companion matrix of the trimmed monic
/// polynomial goes to the eigensolver, which balances it internally.
#[cfg(feature = "eigen")]
fn gef_roots_in_disk(coeffs: &[Complex64], keep_radius: f64) -> Result<(Vec<Complex64>, f64)> {
    let degree = coeffs.len() - 1;
    let sigma = keep_radius;
    // Scaled coefficients a_n = coeffs[n] sigma^n / sqrt(n!), built in log space.
    let mut log_scale = vec![0.0f64; degree + 1];
    let mut acc = 0.0;
    for (n, slot) in log_scale.iter_mut().enumerate().skip(1) {
        acc += sigma.ln() - 0.5 * (n as f64).ln();
        *slot = acc;
    }
    let max_log = log_scale
        .iter()
        .zip(coeffs)
        .map(|(ls, c)| ls + c.norm().max(1e-300).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<Complex64> = coeffs
        .iter()
        .zip(&log_scale)
        .map(|(c, ls)| c * (ls - max_log).exp())
        .collect();

    // Trim trailing coefficients that are numerically zero relative to the
    // peak; they cannot move roots inside |w| <= 1 at the 1e-200 level.
    let trim_threshold = 1e-220;
    let eff_degree = match scaled.iter().rposition(|c| c.norm() > trim_threshold) {
        Some(d) if d >= 1 => d,
        _ => return Err(Error::numeric("leading coefficient underflow")),
    };
    let lead = scaled[eff_degree];
    if lead.norm() < 1e-250 {
        return Err(Error::numeric("leading coefficient underflow"));
    }

    // Companion matrix (column-major): subdiagonal ones, last column -a_k/a_D.
    let d = eff_degree;
    let mut m = vec![c64(0.0, 0.0); d * d];
    for k in 0..d - 1 {
        m[k * d + (k + 1)] = c64(1.0, 0.0); // column k, row k+1
    }
    for k in 0..d {
        m[(d - 1) * d + k] = -scaled[k] / lead;
    }
    let roots_w = crate::linalg::complex_eigenvalues(&mut m, d)
        .map_err(|e| Error::numeric(format!("gef root finder failed: {e}")))?;

    // Keep roots in the disk, Newton-polish on the scaled polynomial.
    let eval = |w: Complex64| -> (Complex64, Complex64) {
        let mut p = c64(0.0, 0.0);
        let mut dp = c64(0.0, 0.0);
        for k in (0..=eff_degree).rev() {
            dp = dp * w + p;
            p = p * w + scaled[k];
        }
        (p, dp)
    };
    let mut kept = Vec::new();
    let mut max_residual = 0.0f64;
    for w0 in roots_w {
        if w0.norm() > 1.02 {
            continue;
        }
        let mut w = w0;
        for _ in 0..3 {
            let (p, dp) = eval(w);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if step.norm() > 0.1 {
                break;
            }
            w -= step;
        }
        if w.norm() * sigma <= keep_radius {
            let (p, _) = eval(w);
            max_residual = max_residual.max(p.norm()); // relative to peak coefficient
            kept.push(w * sigma);
        }
    }
    Ok((kept, max_residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_is_reproducible_bit_for_bit() {
        let a = sample_poisson(1.0, 12.0, 42).unwrap();
        let b = sample_poisson(1.0, 12.0, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_poisson(1.0, 12.0, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn poisson_rejects_bad_parameters() {
        assert!(sample_poisson(0.0, 10.0, 1).is_err());
        assert!(sample_poisson(1.0, -1.0, 1).is_err());
    }

    #[test]
    fn poisson_mean_and_variance_of_count() {
        // mean ~ c pi R^2, index of dispersion near 1
        let (c, r, n) = (1.0, 10.0, 1000usize);
        let mut counts = Vec::with_capacity(n);
        for seed in 0..n as u64 {
            counts.push(sample_poisson(c, r, seed).unwrap().len() as f64);
        }
        let mean: f64 = counts.iter().sum::<f64>() / n as f64;
        let var: f64 = counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let target = c * PI * r * r;
        let se = (target / n as f64).sqrt();
        assert!((mean - target).abs() <= 3.0 * se, "mean {mean} vs {target}");
        let ratio = var / mean;
        assert!((0.9..=1.1).contains(&ratio), "dispersion ratio {ratio}");
    }

    #[test]
    fn poisson_zero_count_draw_gives_empty_configuration() {
        // Tiny window at low intensity: Poisson(mean ~ 3e-6) draws 0.
        let config = sample_poisson(1e-6, 1.0, 5).unwrap();
        assert!(config.is_empty());
        assert_eq!(config.cond_intensity, 1e-6);
    }

    #[test]
    fn cox_mixture_degenerate_weight() {
        for seed in 0..20u64 {
            let config = sample_cox_two_poisson(1.0, 3.0, 0.0, 5.0, seed).unwrap();
            assert_eq!(config.cond_intensity, 3.0);
        }
        assert!(sample_cox_two_poisson(1.0, 3.0, 1.5, 5.0, 0).is_err());
    }

    #[test]
    fn cox_conditional_intensity_variance() {
        // Var[c] = p(1-p)(c1-c2)^2 = 1 for p=1/2, c1=1, c2=3.
        let n = 4000usize;
        let mut vals = Vec::with_capacity(n);
        for seed in 0..n as u64 {
            vals.push(sample_cox_two_poisson(1.0, 3.0, 0.5, 2.0, seed).unwrap().cond_intensity);
        }
        let mean: f64 = vals.iter().sum::<f64>() / n as f64;
        let var: f64 = vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((var - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn shifted_lattice_fixture_and_count_bound() {
        // The shifted origin site is a nearest point (its mirror across the
        // axis ties in norm).
        let config = shifted_lattice_with_shift(c64(0.25, 0.5), 6.0).unwrap();
        let site = c64(0.25, 0.5);
        assert!(config.points.contains(&site));
        assert!(config.points.iter().all(|p| p.norm() >= site.norm() - 1e-15));

        // Gauss circle bound with a generous constant.
        for seed in 0..30u64 {
            let r = 20.0;
            let config = sample_shifted_lattice(r, seed).unwrap();
            let diff = (config.len() as f64 - PI * r * r).abs();
            assert!(diff <= 8.0 * r, "count discrepancy {diff}");
        }
    }

    #[test]
    fn shifted_lattices_differ_by_translation_mod_z2() {
        let a = sample_shifted_lattice(8.0, 1).unwrap();
        let b = sample_shifted_lattice(8.0, 2).unwrap();
        let ua = a.extras.lattice_shift.unwrap();
        let ub = b.extras.lattice_shift.unwrap();
        let shift = c64(ua.0 - ub.0, ua.1 - ub.1);
        // Interior points of b, translated by the shift difference, appear in a.
        let interior = b
            .points
            .iter()
            .filter(|p| p.norm() < 8.0 - shift.norm() - 0.01)
            .take(50);
        for p in interior {
            let q = *p + shift;
            assert!(
                a.points.iter().any(|x| (*x - q).norm() < 1e-9),
                "translated point {q} missing"
            );
        }
    }

    #[test]
    fn perturbed_lattice_at_zero_variance_reduces_to_shifted() {
        for seed in [3u64, 17] {
            let perturbed = sample_perturbed_lattice(0.0, 9.0, seed).unwrap();
            let u = perturbed.extras.lattice_shift.unwrap();
            let shifted = shifted_lattice_with_shift(c64(u.0, u.1), 9.0).unwrap();
            assert_eq!(perturbed.points, shifted.points);
        }
    }

    #[test]
    fn perturbed_lattice_displacement_statistic_matches_gaussian_oracle() {
        // Mean |zeta| against an independent direct sampler of the same law.
        let a = 0.04;
        let mut displacements = Vec::new();
        for seed in 0..40u64 {
            let config = sample_perturbed_lattice(a, 10.0, seed).unwrap();
            let u = config.extras.lattice_shift.unwrap();
            let u = c64(u.0, u.1);
            for p in &config.points {
                if p.norm() > 8.0 {
                    continue; // interior only: avoid clipped-border bias
                }
                let q = *p - u;
                let zeta = c64(q.re - q.re.round(), q.im - q.im.round());
                displacements.push(zeta.norm());
            }
        }
        let mean: f64 = displacements.iter().sum::<f64>() / displacements.len() as f64;

        let mut rng = rng_for(987);
        let m = 200_000usize;
        let direct: f64 = (0..m)
            .map(|_| standard_complex_gaussian(&mut rng, a).norm())
            .sum::<f64>()
            / m as f64;
        let sd = (displacements.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
            / (displacements.len() as f64 - 1.0))
            .sqrt();
        let se = sd / (displacements.len() as f64).sqrt() + 3e-4;
        assert!(
            (mean - direct).abs() <= 4.0 * se,
            "mean displacement {mean} vs direct {direct}"
        );
    }

    #[test]
    fn samplers_reject_undersized_lattice_windows() {
        assert!(sample_shifted_lattice(0.5, 1).is_err());
        assert!(sample_perturbed_lattice(0.01, 0.5, 1).is_err());
    }

    #[test]
    fn seed_splitter_is_injective_in_practice() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..10_000u64 {
            assert!(seen.insert(split_seed(12345, i)));
        }
    }
}

#[cfg(all(test, feature = "eigen"))]
mod eigen_tests {
    use super::*;

    #[test]
    fn ginibre_single_point_is_gaussian_entry() {
        let config = sample_ginibre(1, 9).unwrap();
        assert_eq!(config.len(), 1);
        assert!(config.points[0].norm() < 6.0);
        assert_eq!(config.window_radius, 1.0);
    }

    #[test]
    fn ginibre_bulk_count_matches_circular_law() {
        // Count inside the usable radius ~ (usable radius)^2 within 5%.
        let n = 400usize;
        let usable = ginibre_usable_radius(n);
        assert!(usable > 0.0, "usable radius must be positive at n=400");
        let seeds = 60u64;
        let mut total = 0.0;
        for seed in 0..seeds {
            let config = sample_ginibre(n, seed).unwrap();
            total += config.count_in_disk(c64(0.0, 0.0), usable) as f64;
        }
        let mean = total / seeds as f64;
        let target = usable * usable;
        assert!(
            (mean - target).abs() <= 0.05 * target,
            "bulk count {mean} vs {target}"
        );
    }

    #[test]
    fn ginibre_pair_correlation_suppression() {
        // Short-distance pairs are suppressed relative to a Poisson control.
        let n = 400usize;
        let usable = ginibre_usable_radius(n);
        let dist = 0.1;
        let mut gin_pairs = 0usize;
        let mut poi_pairs = 0usize;
        for seed in 0..60u64 {
            let g = sample_ginibre(n, seed).unwrap();
            let pts: Vec<_> = g.points.iter().filter(|p| p.norm() <= usable).collect();
            for (i, p) in pts.iter().enumerate() {
                for q in &pts[i + 1..] {
                    if (**p - **q).norm() <= dist {
                        gin_pairs += 1;
                    }
                }
            }
            let control = sample_poisson(1.0 / PI, usable, split_seed(7777, seed)).unwrap();
            for (i, p) in control.points.iter().enumerate() {
                for q in &control.points[i + 1..] {
                    if (*p - *q).norm() <= dist {
                        poi_pairs += 1;
                    }
                }
            }
        }
        assert!(poi_pairs > 0, "control must produce some close pairs");
        let ratio = gin_pairs as f64 / poi_pairs as f64;
        assert!(ratio < 0.2, "pair suppression ratio {ratio}");
    }

    #[test]
    fn gef_zero_count_and_residuals() {
        let keep_radius = 5.0;
        let seeds = 60u64;
        let mut counts = Vec::new();
        for seed in 0..seeds {
            let config = sample_gef_zeros(keep_radius, seed).unwrap();
            assert!(config.points.iter().all(|z| z.norm() <= keep_radius + 1e-12));
            // Residual oracle: the truncated series evaluated directly,
            // independent of the root-finder path.
            let mut rng = rng_for(split_seed(seed, config.extras.redraws as u64));
            let degree = gef_truncation_degree(keep_radius);
            let coeffs: Vec<Complex64> = (0..=degree)
                .map(|_| standard_complex_gaussian(&mut rng, 1.0))
                .collect();
            let max_coeff = {
                let mut m = 0.0f64;
                let mut inv_sqrt_fact = 1.0f64;
                for (n, c) in coeffs.iter().enumerate() {
                    if n > 0 {
                        inv_sqrt_fact /= (n as f64).sqrt();
                    }
                    m = m.max(c.norm() * inv_sqrt_fact);
                }
                m
            };
            for root in &config.points {
                let mut value = c64(0.0, 0.0);
                let mut term = c64(1.0, 0.0); // z^n / sqrt(n!)
                for (n, c) in coeffs.iter().enumerate() {
                    if n > 0 {
                        term *= root / (n as f64).sqrt();
                    }
                    value += c * term;
                }
                assert!(
                    value.norm() <= 1e-6 * max_coeff,
                    "series residual {} at root {root}",
                    value.norm()
                );
            }
            counts.push(config.len() as f64);
        }
        let mean: f64 = counts.iter().sum::<f64>() / seeds as f64;
        let target = keep_radius * keep_radius;
        let sd = (counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (seeds as f64 - 1.0)).sqrt();
        let se = sd / (seeds as f64).sqrt();
        assert!(
            (mean - target).abs() <= 3.0 * se.max(0.3),
            "zero count {mean} vs {target}"
        );
    }
}
