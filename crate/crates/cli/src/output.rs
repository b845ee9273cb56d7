use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiments::Row;

pub const RESULTS_FILE: &str = "results.csv";
pub const TIMING_FILE: &str = "timing.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
/// The resolved configuration; passing it back with `--config` repeats the run.
pub const CONFIG_FILE: &str = "config.toml";
pub const HEADER: [&str; 6] = ["experiment", "model", "method", "trial", "metric", "value"];

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "-g", env!("GEOMC_GIT_REV"));

/// `Display` for `f64` prints the shortest decimal that parses back to the
/// same value.
fn number(value: f64) -> String {
    value.to_string()
}

pub fn write_rows(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment,
            &r.model,
            &r.method,
            &r.trial.to_string(),
            &r.metric,
            &number(r.value),
        ])?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_samples(dir: &Path, method: &str, samples: &[Vec<f64>]) -> Result<PathBuf> {
    let path = dir.join(format!("samples-{method}.csv"));
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    let dim = samples.first().map_or(0, Vec::len);
    w.write_record((0..dim).map(|j| format!("q{j}")))?;
    for s in samples {
        w.write_record(s.iter().map(|v| number(*v)))?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub version: &'static str,
    pub experiment: &'static str,
    pub seed: u64,
    pub config: &'a ExperimentConfig,
    pub started_unix_secs: u64,
    pub wall_clock_secs: f64,
    pub passed: bool,
    pub failures: &'a [String],
    pub files: Vec<String>,
}

pub fn write_manifest(dir: &Path, manifest: &Manifest<'_>) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
