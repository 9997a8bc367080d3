//! Configuration-driven experiment runner.
//!
//! A run reads one TOML configuration, dispatches to the matching
//! experiment and writes `records.csv` and `summary.json` (plus
//! `baselines.json` when capturing) into the output directory. The run
//! passes iff every check passes.

pub mod config;
pub mod experiments;

use std::fs;
use std::path::{Path, PathBuf};

use fracorlicz::lab::Baselines;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub use config::RunConfig;
pub use experiments::{Check, Outcome};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] fracorlicz::Error),

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// `2` for anything the user can fix in the inputs, `1` otherwise.
    pub fn exit_code(&self) -> u8 {
        use fracorlicz::Error as E;
        match self {
            CliError::Config(_) | CliError::Write { .. } => 2,
            CliError::Core(E::Domain(_) | E::Config(_) | E::GridMismatch(_) | E::Format(_) | E::Io(_) | E::MeanZero { .. }) => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub grid_n: Option<usize>,
    pub capture_baselines: bool,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub kind: &'static str,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub failures: Vec<String>,
    pub baselines_written: Option<PathBuf>,
}

impl RunSummary {
    pub fn exit_code(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// Applies command-line overrides to a loaded configuration.
pub fn apply_overrides(cfg: &mut RunConfig, opts: &Options) -> Result<(), CliError> {
    if let Some(seed) = opts.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(n) = opts.grid_n {
        cfg.grid.n = n;
        cfg.grid()?;
    }
    Ok(())
}

fn load_baselines(cfg: &RunConfig, capture: bool) -> Result<Baselines, CliError> {
    match (&cfg.experiment.baselines, capture) {
        (Some(p), false) => {
            let path = cfg.resolve(p);
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read baselines {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad baselines {}: {e}", path.display())))
        }
        _ => Ok(Baselines::default()),
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

/// Runs the experiment and writes its artifacts. When capturing, baseline
/// assertions are skipped and `baselines.json` is written only if every
/// remaining check passed.
pub fn run(cfg: &RunConfig, opts: &Options) -> Result<RunSummary, CliError> {
    let baselines = load_baselines(cfg, opts.capture_baselines)?;
    let outcome = experiments::execute(cfg, &baselines)?;
    fs::create_dir_all(&opts.out).map_err(|source| CliError::Write { path: opts.out.clone(), source })?;

    let pass = outcome.checks.iter().all(|c| c.pass);
    let mut baselines_written = None;
    if opts.capture_baselines && pass {
        let path = opts.out.join("baselines.json");
        let text = serde_json::to_string_pretty(&outcome.captured).expect("baselines serialize");
        write(&path, format!("{text}\n").as_bytes())?;
        baselines_written = Some(path);
    }
    write(&opts.out.join("records.csv"), &outcome.csv)?;
    for (name, bytes) in &outcome.files {
        write(&opts.out.join(name), bytes)?;
    }
    let kind = cfg.experiment.kind.name();
    let summary = json!({
        "kind": kind,
        "seed": cfg.experiment.seed,
        "grid": cfg.grid,
        "pass": pass,
        "checks": outcome.checks,
        "baselines": baselines,
        "captured": outcome.captured,
        "details": outcome.details,
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write(&opts.out.join("summary.json"), format!("{text}\n").as_bytes())?;

    Ok(RunSummary {
        kind,
        seed: cfg.experiment.seed,
        pass,
        checks: outcome.checks,
        failures: outcome.failures,
        baselines_written,
    })
}

/// Runs once in capture mode; the baseline file is the returned path.
pub fn capture_baselines(cfg: &RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    let opts = Options { out: out.to_path_buf(), capture_baselines: true, ..Default::default() };
    let summary = run(cfg, &opts)?;
    summary
        .baselines_written
        .ok_or_else(|| CliError::Config(format!("{} run failed; no baselines written", summary.kind)))
}
