//! File formats: point CSV exports with JSON sidecars, per-replicate
//! statistic dumps, and the experiment-report JSON consumed by the CLI's
//! `report` subcommand.

use crate::mc::{MCEstimate, OracleValue};
use crate::pointproc::{PointConfiguration, ProcessModel};
use crate::{Complex64, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One verified statement inside an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub tolerance: String,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(
        name: impl Into<String>,
        oracle: Option<OracleValue>,
        observed: Option<f64>,
        stderr: Option<f64>,
        tolerance: impl Into<String>,
        pass: bool,
    ) -> Self {
        CheckRow {
            name: name.into(),
            oracle,
            observed,
            stderr,
            tolerance: tolerance.into(),
            pass,
        }
    }
}

/// Full record of one experiment run; reproducible from its own fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ProcessModel>,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
    /// Headline oracle/estimate of the experiment (first check), kept at the
    /// top level for quick scanning.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_mean: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub verdict: bool,
    pub checks: Vec<CheckRow>,
    pub tool_version: String,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, params: serde_json::Value) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            model: None,
            params,
            n_reps: None,
            base_seed: None,
            oracle: None,
            mc_mean: None,
            mc_variance: None,
            stderr: None,
            verdict: true,
            checks: Vec::new(),
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn with_estimate(&mut self, est: &MCEstimate) -> &mut Self {
        self.n_reps = Some(est.n_reps);
        self.base_seed = Some(est.base_seed);
        self.mc_mean = Some([est.mean.re, est.mean.im]);
        self.mc_variance = Some(est.variance);
        self.stderr = Some(est.stderr_variance);
        self
    }

    pub fn push(&mut self, check: CheckRow) {
        self.verdict &= check.pass;
        if self.oracle.is_none() {
            self.oracle = check.oracle;
        }
        self.checks.push(check);
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        file.write_all(b"\n")?;
        Ok(())
    }

    /// One human-readable line per check.
    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                let oracle = match c.oracle {
                    Some(OracleValue::Finite(v)) => format!("{v:.6}"),
                    Some(OracleValue::Diverges) => "diverges".into(),
                    None => "-".into(),
                };
                let observed = c.observed.map(|v| format!("{v:.6}")).unwrap_or("-".into());
                format!(
                    "{} [{}] oracle={} observed={} tol={} -> {}",
                    self.experiment,
                    c.name,
                    oracle,
                    observed,
                    c.tolerance,
                    if c.pass { "pass" } else { "FAIL" }
                )
            })
            .collect()
    }
}

/// `re,im` rows, one point per line.
pub fn write_points_csv(config: &PointConfiguration, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(config.len() * 48 + 8);
    out.push_str("re,im\n");
    for p in &config.points {
        out.push_str(&format!("{:.17e},{:.17e}\n", p.re, p.im));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Sidecar metadata for a point export.
#[derive(Debug, Serialize, Deserialize)]
pub struct SampleMeta {
    pub model: ProcessModel,
    pub seed: u64,
    pub window_radius: f64,
    pub cond_intensity: f64,
    pub count: usize,
    #[serde(flatten)]
    pub extras: crate::pointproc::ConfigExtras,
    pub tool_version: String,
}

pub fn write_meta_json(model: &ProcessModel, seed: u64, config: &PointConfiguration, path: &Path) -> Result<()> {
    let meta = SampleMeta {
        model: model.clone(),
        seed,
        window_radius: config.window_radius,
        cond_intensity: config.cond_intensity,
        count: config.len(),
        extras: config.extras.clone(),
        tool_version: TOOL_VERSION.to_string(),
    };
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, &meta)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// `seed,stat,re,im` rows for per-replicate statistic dumps.
pub fn write_replicates_csv(path: &Path, rows: &[(u64, String, Complex64)]) -> Result<()> {
    let mut out = String::with_capacity(rows.len() * 64 + 16);
    out.push_str("seed,stat,re,im\n");
    for (seed, stat, value) in rows {
        out.push_str(&format!("{seed},{stat},{:.17e},{:.17e}\n", value.re, value.im));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::sample_poisson;

    #[test]
    fn csv_and_meta_round_trip() {
        let dir = std::env::temp_dir().join("zetafield_report_test");
        std::fs::create_dir_all(&dir).unwrap();
        let model = ProcessModel::Poisson { intensity: 1.0 };
        let config = sample_poisson(1.0, 5.0, 42).unwrap();
        let csv_path = dir.join("points.csv");
        let meta_path = dir.join("meta.json");
        write_points_csv(&config, &csv_path).unwrap();
        write_meta_json(&model, 42, &config, &meta_path).unwrap();

        let csv = std::fs::read_to_string(&csv_path).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("re,im"));
        assert_eq!(csv.lines().count(), config.len() + 1);
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect();
        assert_eq!(first[0], config.points[0].re);

        let meta: SampleMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path).unwrap()).unwrap();
        assert_eq!(meta.count, config.len());
        assert_eq!(meta.seed, 42);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn report_json_shape() {
        let mut report = ExperimentReport::new("demo", serde_json::json!({"r": 5.0}));
        report.push(CheckRow::new(
            "main",
            Some(OracleValue::Finite(3.14)),
            Some(3.15),
            Some(0.01),
            "3*stderr",
            true,
        ));
        report.push(CheckRow::new("aux", None, Some(0.0), None, "exact", false));
        assert!(!report.verdict);
        let value = serde_json::to_value(&report).unwrap();
        assert_eq!(value["experiment"], "demo");
        assert_eq!(value["checks"].as_array().unwrap().len(), 2);
        assert_eq!(value["oracle"]["kind"], "finite");
    }
}
