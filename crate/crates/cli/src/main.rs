mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::Parser;

use config::{Overrides, RawConfig, SEED_ENV};
use output::{Manifest, CONFIG_FILE, MANIFEST_FILE, RESULTS_FILE, TIMING_FILE};

/// Runs one geomc experiment and writes its results.
///
/// Exit status is 0 on success, 1 on configuration or IO errors and 2 when
/// the experiment misses one of its thresholds.
#[derive(Debug, Parser)]
#[command(name = "geomc", version = output::VERSION)]
struct Cli {
    /// order-study, properties, jacobian-check, harmonic-esjd, sample or robustness.
    experiment: String,
    /// TOML config file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Falls back to the file, then $GEOMC_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// Repeat to select several methods.
    #[arg(long = "method")]
    methods: Vec<String>,
    #[arg(long)]
    step_size: Option<f64>,
    #[arg(long)]
    num_steps: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let raw = match &cli.config {
        Some(path) => config::read_file(path)?,
        None => RawConfig::default(),
    };
    let flags = Overrides {
        experiment: Some(cli.experiment),
        seed: cli.seed,
        threads: cli.threads,
        out: cli.out,
        model: cli.model,
        methods: cli.methods,
        step_size: cli.step_size,
        num_steps: cli.num_steps,
        samples: cli.samples,
        trials: cli.trials,
    };
    let cfg = config::resolve(raw, flags, std::env::var(SEED_ENV).ok())?;

    let started_unix_secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let outcome = experiments::run(&cfg)?;
    let wall_clock_secs = clock.elapsed().as_secs_f64();

    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    output::write_rows(&cfg.out.join(RESULTS_FILE), &outcome.rows)?;
    let mut files = vec![RESULTS_FILE.to_string()];
    if !outcome.timing.is_empty() {
        output::write_rows(&cfg.out.join(TIMING_FILE), &outcome.timing)?;
        files.push(TIMING_FILE.to_string());
    }
    for (method, samples) in &outcome.samples {
        let path = output::write_samples(&cfg.out, method, samples)?;
        files.push(path.file_name().unwrap_or_default().to_string_lossy().into_owned());
    }
    let normalized = cfg.out.join(CONFIG_FILE);
    std::fs::write(&normalized, cfg.to_toml()).with_context(|| format!("writing {}", normalized.display()))?;
    files.push(CONFIG_FILE.to_string());
    files.push(MANIFEST_FILE.to_string());

    let passed = outcome.failures.is_empty();
    output::write_manifest(
        &cfg.out,
        &Manifest {
            version: output::VERSION,
            experiment: cfg.experiment.name(),
            seed: cfg.seed,
            config: &cfg,
            started_unix_secs,
            wall_clock_secs,
            passed,
            failures: &outcome.failures,
            files,
        },
    )?;

    for failure in &outcome.failures {
        eprintln!("threshold missed: {failure}");
    }
    println!(
        "{}: {} rows written to {} in {wall_clock_secs:.2}s",
        cfg.experiment,
        outcome.rows.len(),
        cfg.out.display()
    );
    Ok(passed)
}
