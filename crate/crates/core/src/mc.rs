//! Seeded-replicate Monte Carlo engine.
//!
//! Replicate `i` of a run draws its own generator from a deterministic
//! splitter over `(base_seed, i)`, so replicate streams are independent and
//! reproducible under any thread schedule. Results are merged by a pairwise
//! tree reduction keyed by replicate index, which makes every estimate
//! bit-identical across re-runs regardless of parallelism.
//!
//! The variance convention for complex statistics is `E|X - EX|^2`; no
//! pseudo-variance is tracked.

use crate::pointproc::{split_seed, PointConfiguration};
use crate::{c64, Complex64, Error, Result};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Estimate of the mean and variance of a complex-valued statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub n_reps: usize,
    pub mean: Complex64,
    /// Sample version of `E|X - EX|^2` (divisor `n - 1`).
    pub variance: f64,
    pub stderr_mean: f64,
    /// Jackknife standard error of the variance estimate.
    pub stderr_variance: f64,
    pub base_seed: u64,
    /// Replicates whose statistic failed and were excluded (at most 1%).
    #[serde(default)]
    pub n_failures: usize,
}

/// Oracle side of a verdict: an analytic value or a certified divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum OracleValue {
    Finite(f64),
    Diverges,
}

/// How an estimate is compared against its oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "param", rename_all = "snake_case")]
pub enum ToleranceRule {
    /// `|variance - oracle| <= k * stderr_variance`.
    KStderr(f64),
    /// `|variance - oracle| <= tol * |oracle|`.
    Relative(f64),
    /// `|variance - oracle| <= max(k stderr, tol |oracle|)` (finite-size allowance).
    KStderrOrRelative { k: f64, tol: f64 },
}

impl ToleranceRule {
    pub fn describe(&self) -> String {
        match self {
            ToleranceRule::KStderr(k) => format!("{k}*stderr"),
            ToleranceRule::Relative(t) => format!("relative {t}"),
            ToleranceRule::KStderrOrRelative { k, tol } => format!("max({k}*stderr, {tol} relative)"),
        }
    }
}

/// Outcome of comparing one Monte Carlo estimate against an oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub mc: MCEstimate,
    pub oracle: OracleValue,
    pub tolerance_rule: String,
    pub pass: bool,
}

/// Compare the variance estimate against a finite oracle under a rule.
pub fn compare(mc: &MCEstimate, oracle: f64, rule: ToleranceRule) -> Verdict {
    let diff = (mc.variance - oracle).abs();
    let pass = match rule {
        ToleranceRule::KStderr(k) => diff <= k * mc.stderr_variance,
        ToleranceRule::Relative(tol) => diff <= tol * oracle.abs(),
        ToleranceRule::KStderrOrRelative { k, tol } => {
            diff <= (k * mc.stderr_variance).max(tol * oracle.abs())
        }
    };
    Verdict {
        mc: mc.clone(),
        oracle: OracleValue::Finite(oracle),
        tolerance_rule: rule.describe(),
        pass,
    }
}

/// Deterministic pairwise tree reduction of complex values.
fn tree_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => c64(0.0, 0.0),
        1 => values[0],
        n => {
            let mid = n / 2;
            tree_sum(&values[..mid]) + tree_sum(&values[mid..])
        }
    }
}

fn tree_sum_f64(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let mid = n / 2;
            tree_sum_f64(&values[..mid]) + tree_sum_f64(&values[mid..])
        }
    }
}

/// Estimate mean/variance and their standard errors from replicate values.
///
/// The jackknife standard error of the variance is computed from the n
/// leave-one-out variances in O(n) via running-sum updates.
pub fn estimate_from_values(values: &[Complex64], base_seed: u64) -> Result<MCEstimate> {
    let n = values.len();
    if n < 2 {
        return Err(Error::parameter("need at least 2 replicates"));
    }
    let nf = n as f64;
    let s1 = tree_sum(values);
    let mean = s1 / nf;
    let centered_sq: Vec<f64> = values.iter().map(|x| (x - mean).norm_sqr()).collect();
    let ss = tree_sum_f64(&centered_sq);
    let variance = ss / (nf - 1.0);
    let stderr_mean = (variance / nf).sqrt();

    // Leave-one-out variances from sufficient statistics.
    let s2: f64 = tree_sum_f64(&values.iter().map(|x| x.norm_sqr()).collect::<Vec<_>>());
    let mut loo = Vec::with_capacity(n);
    for x in values {
        let s1_i = s1 - x;
        let s2_i = s2 - x.norm_sqr();
        let m_i = s1_i / (nf - 1.0);
        let ss_i = s2_i - (nf - 1.0) * m_i.norm_sqr();
        loo.push(ss_i / (nf - 2.0));
    }
    let loo_mean = tree_sum_f64(&loo) / nf;
    let jk: f64 = tree_sum_f64(&loo.iter().map(|v| (v - loo_mean).powi(2)).collect::<Vec<_>>());
    let stderr_variance = ((nf - 1.0) / nf * jk).sqrt();

    Ok(MCEstimate {
        n_reps: n,
        mean,
        variance,
        stderr_mean,
        stderr_variance,
        base_seed,
        n_failures: 0,
    })
}

/// Materialize a bank of replicate configurations (parallel when enabled).
///
/// Banks let several experiments share one expensive set of realizations,
/// e.g. eigenvalue ensembles.
pub fn sample_bank<S>(sampler: S, n_reps: usize, base_seed: u64) -> Result<Vec<PointConfiguration>>
where
    S: Fn(u64) -> Result<PointConfiguration> + Sync,
{
    let seeds: Vec<u64> = (0..n_reps as u64).map(|i| split_seed(base_seed, i)).collect();
    #[cfg(feature = "parallel")]
    let iter = seeds.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = seeds.iter();
    iter.map(|&s| sampler(s)).collect()
}

/// Evaluate a statistic over an existing bank and estimate its moments.
pub fn run_with_bank<F>(
    bank: &[PointConfiguration],
    statistic: F,
    base_seed: u64,
) -> Result<MCEstimate>
where
    F: Fn(&PointConfiguration) -> Result<Complex64> + Sync,
{
    let outcomes = evaluate_bank(bank, &statistic)?;
    let mut est = estimate_from_values(&outcomes.values, base_seed)?;
    est.n_failures = outcomes.failures;
    Ok(est)
}

/// Replicate values over a bank with the 1% failure policy applied.
pub struct BankValues {
    pub values: Vec<Complex64>,
    pub failures: usize,
}

pub fn evaluate_bank<F>(bank: &[PointConfiguration], statistic: &F) -> Result<BankValues>
where
    F: Fn(&PointConfiguration) -> Result<Complex64> + Sync,
{
    #[cfg(feature = "parallel")]
    let iter = bank.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = bank.iter();
    let raw: Vec<Result<Complex64>> = iter.map(statistic).collect();

    let failures = raw.iter().filter(|r| r.is_err()).count();
    if failures * 100 > bank.len() {
        let first = raw.iter().find_map(|r| r.as_ref().err());
        return Err(Error::Experiment(format!(
            "statistic failed on {failures}/{} replicates (first: {})",
            bank.len(),
            first.map(|e| e.to_string()).unwrap_or_default()
        )));
    }
    Ok(BankValues {
        values: raw.into_iter().filter_map(|r| r.ok()).collect(),
        failures,
    })
}

/// Sample `n_reps` replicates of `statistic(config)` and estimate moments.
pub fn run<S, F>(sampler: S, statistic: F, n_reps: usize, base_seed: u64) -> Result<MCEstimate>
where
    S: Fn(u64) -> Result<PointConfiguration> + Sync,
    F: Fn(&PointConfiguration) -> Result<Complex64> + Sync,
{
    if n_reps < 2 {
        return Err(Error::parameter("need at least 2 replicates"));
    }
    let seeds: Vec<u64> = (0..n_reps as u64).map(|i| split_seed(base_seed, i)).collect();
    #[cfg(feature = "parallel")]
    let iter = seeds.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = seeds.iter();
    let raw: Vec<Result<Complex64>> = iter.map(|&s| sampler(s).and_then(|c| statistic(&c))).collect();

    let failures = raw.iter().filter(|r| r.is_err()).count();
    if failures * 100 > n_reps {
        let first = raw.iter().find_map(|r| r.as_ref().err());
        return Err(Error::Experiment(format!(
            "statistic failed on {failures}/{n_reps} replicates (first: {})",
            first.map(|e| e.to_string()).unwrap_or_default()
        )));
    }
    let values: Vec<Complex64> = raw.into_iter().filter_map(|r| r.ok()).collect();
    let mut est = estimate_from_values(&values, base_seed)?;
    est.n_failures = failures;
    Ok(est)
}

/// Paired comparison of two statistics evaluated on the same replicates.
///
/// Returns the difference of sample variances together with its jackknife
/// standard error. Common random numbers make this far tighter than
/// comparing two independent estimates.
pub fn paired_variance_difference(xs: &[Complex64], ys: &[Complex64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::parameter("paired comparison needs equal-length samples (>= 3)"));
    }
    let n = xs.len() as f64;
    let sx = tree_sum(xs);
    let sy = tree_sum(ys);
    let sx2 = tree_sum_f64(&xs.iter().map(|x| x.norm_sqr()).collect::<Vec<_>>());
    let sy2 = tree_sum_f64(&ys.iter().map(|y| y.norm_sqr()).collect::<Vec<_>>());
    let var = |s1: Complex64, s2: f64, m: f64| (s2 - s1.norm_sqr() / m) / (m - 1.0);
    let theta = var(sx, sx2, n) - var(sy, sy2, n);

    let mut loo = Vec::with_capacity(xs.len());
    for (x, y) in xs.iter().zip(ys) {
        let vx = var(sx - x, sx2 - x.norm_sqr(), n - 1.0);
        let vy = var(sy - y, sy2 - y.norm_sqr(), n - 1.0);
        loo.push(vx - vy);
    }
    let loo_mean = tree_sum_f64(&loo) / n;
    let jk = tree_sum_f64(&loo.iter().map(|v| (v - loo_mean).powi(2)).collect::<Vec<_>>());
    Ok((theta, ((n - 1.0) / n * jk).sqrt()))
}

/// Paired mean difference with the standard error of the difference.
pub fn paired_mean_difference(xs: &[Complex64], ys: &[Complex64]) -> Result<(Complex64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::parameter("paired comparison needs equal-length samples (>= 2)"));
    }
    let diffs: Vec<Complex64> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    let est = estimate_from_values(&diffs, 0)?;
    Ok((est.mean, est.stderr_mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::sample_poisson;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    fn gaussian_values(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| crate::pointproc::standard_complex_gaussian(&mut rng, 1.0))
            .collect()
    }

    #[test]
    fn zero_statistic() {
        let est = run(
            |seed| sample_poisson(1.0, 3.0, seed),
            |_| Ok(c64(0.0, 0.0)),
            100,
            7,
        )
        .unwrap();
        assert_eq!(est.mean, c64(0.0, 0.0));
        assert_eq!(est.variance, 0.0);
    }

    #[test]
    fn poisson_count_moments() {
        // Count in the unit disk for intensity 1: mean = variance = pi.
        let est = run(
            |seed| sample_poisson(1.0, 1.0, seed),
            |config| Ok(c64(config.len() as f64, 0.0)),
            4000,
            11,
        )
        .unwrap();
        assert!((est.mean.re - PI).abs() <= 3.0 * est.stderr_mean, "mean {}", est.mean.re);
        assert!(
            (est.variance - PI).abs() <= 3.0 * est.stderr_variance,
            "variance {} +- {}",
            est.variance,
            est.stderr_variance
        );
    }

    #[test]
    fn determinism_bit_for_bit() {
        let runner = || {
            run(
                |seed| sample_poisson(2.0, 4.0, seed),
                |config| {
                    let s: Complex64 = config.points.iter().map(|p| p / (1.0 + p.norm_sqr())).sum();
                    Ok(s)
                },
                500,
                99,
            )
            .unwrap()
        };
        assert_eq!(runner(), runner());
    }

    #[test]
    fn complex_gaussian_variance_convention() {
        // E|Z|^2 = 1 under the convention; 10^4 replicates within 3 stderr.
        let values = gaussian_values(10_000, 5);
        let est = estimate_from_values(&values, 5).unwrap();
        assert!(
            (est.variance - 1.0).abs() <= 3.0 * est.stderr_variance,
            "variance {} +- {}",
            est.variance,
            est.stderr_variance
        );
    }

    #[test]
    fn jackknife_stderr_shrinks_like_sqrt_n() {
        let est1 = estimate_from_values(&gaussian_values(4000, 21), 0).unwrap();
        let est2 = estimate_from_values(&gaussian_values(8000, 22), 0).unwrap();
        let factor = est2.stderr_variance / est1.stderr_variance;
        assert!(
            (0.6..=0.82).contains(&factor),
            "shrink factor {factor} outside [0.6, 0.82]"
        );
    }

    #[test]
    fn compare_rules() {
        let est = estimate_from_values(&gaussian_values(2000, 3), 3).unwrap();
        let exact = compare(&est, est.variance, ToleranceRule::KStderr(3.0));
        assert!(exact.pass);
        let off = compare(
            &est,
            est.variance + 10.0 * est.stderr_variance,
            ToleranceRule::KStderr(3.0),
        );
        assert!(!off.pass);
        let rel = compare(&est, est.variance * 1.04, ToleranceRule::KStderrOrRelative { k: 3.0, tol: 0.05 });
        assert!(rel.pass);
    }

    #[test]
    fn failure_policy() {
        // 50% failures: experiment error.
        let res = run(
            |seed| sample_poisson(1.0, 2.0, seed),
            |config| {
                if config.len() % 2 == 0 {
                    Err(Error::numeric("synthetic failure"))
                } else {
                    Ok(c64(1.0, 0.0))
                }
            },
            200,
            1,
        );
        assert!(res.is_err());
    }

    #[test]
    fn paired_variance_difference_detects_equality() {
        let xs = gaussian_values(3000, 8);
        let ys: Vec<Complex64> = xs.iter().map(|x| x * c64(0.0, 1.0)).collect(); // same moduli
        let (theta, se) = paired_variance_difference(&xs, &ys).unwrap();
        assert!(theta.abs() <= 3.0 * se.max(1e-12), "theta {theta}, se {se}");
    }
}
