//! Result serialization: `results.csv` with one row per sweep point,
//! `summary.json` with aggregate metrics, and `manifest.json` with the
//! fully resolved configuration for exact reruns.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use crate::config::ResolvedConfig;
use crate::CliError;

/// Mean, half-width of the 95% normal confidence interval, and sample count.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricStat {
    pub mean: f64,
    pub ci95: f64,
    pub n: usize,
}

/// Aggregate a set of per-trial samples into a summary metric.
pub fn stat(samples: &[f64]) -> MetricStat {
    let n = samples.len();
    if n == 0 {
        return MetricStat { mean: 0.0, ci95: 0.0, n: 0 };
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return MetricStat { mean, ci95: 0.0, n };
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    MetricStat { mean, ci95: 1.96 * (var / n as f64).sqrt(), n }
}

/// A deterministic scalar reported in the same shape as sampled metrics.
pub fn scalar(value: f64) -> MetricStat {
    MetricStat { mean: value, ci95: 0.0, n: 1 }
}

/// Shortest round-trip decimal form, used for every CSV cell.
pub fn fmt(value: f64) -> String {
    format!("{value}")
}

/// Everything an experiment produces: a CSV table and named metrics.
#[derive(Debug, Default)]
pub struct ExperimentOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub metrics: BTreeMap<String, MetricStat>,
}

impl ExperimentOutput {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn insert_metric(&mut self, name: impl Into<String>, value: MetricStat) {
        self.metrics.insert(name.into(), value);
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    seed: u64,
    runtime_s: f64,
    metrics: &'a BTreeMap<String, MetricStat>,
}

pub fn write_all(
    resolved: &ResolvedConfig,
    out: &ExperimentOutput,
    runtime: Duration,
) -> Result<(), CliError> {
    std::fs::create_dir_all(&resolved.out_dir)
        .map_err(|e| io_err(&resolved.out_dir, "create output directory", &e))?;

    let csv_path = resolved.out_dir.join("results.csv");
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&csv_path)
        .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", csv_path.display())))?;
    writer
        .write_record(&out.header)
        .and_then(|_| out.rows.iter().try_for_each(|row| writer.write_record(row)))
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", csv_path.display())))?;
    writer
        .flush()
        .map_err(|e| io_err(&csv_path, "flush", &e))?;

    let summary = Summary {
        experiment: resolved.experiment.name(),
        seed: resolved.seed,
        runtime_s: runtime.as_secs_f64(),
        metrics: &out.metrics,
    };
    write_json(&resolved.out_dir.join("summary.json"), &summary)?;
    write_json(&resolved.out_dir.join("manifest.json"), resolved)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    let mut file = std::fs::File::create(path).map_err(|e| io_err(path, "create", &e))?;
    file.write_all(text.as_bytes()).map_err(|e| io_err(path, "write", &e))
}

fn io_err(path: &Path, action: &str, err: &std::io::Error) -> CliError {
    CliError::Runtime(format!("cannot {action} {}: {err}", path.display()))
}
