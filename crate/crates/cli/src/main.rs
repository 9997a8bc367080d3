use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fracorlicz_cli::{apply_overrides, run, CliError, Options, RunConfig, RunSummary};

/// Runs a fracorlicz experiment described by a TOML configuration.
#[derive(Debug, Parser)]
#[command(name = "fracorlicz", version)]
struct Args {
    /// Experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for records.csv, summary.json and baselines.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides `experiment.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Record observed maxima as baselines instead of asserting them.
    #[arg(long)]
    capture_baselines: bool,
    /// Overrides `grid.n`.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Only report failures.
    #[arg(long)]
    quiet: bool,
}

fn report(summary: &RunSummary, quiet: bool) {
    if !quiet {
        for c in &summary.checks {
            println!("{} {:<20} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let passed = summary.checks.iter().filter(|c| c.pass).count();
        println!("{}: {passed}/{} checks passed", summary.kind, summary.checks.len());
        if let Some(p) = &summary.baselines_written {
            println!("baselines written to {}", p.display());
        }
    }
    for line in &summary.failures {
        eprintln!("failed: {line}");
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = Options {
        out: args.out,
        seed: args.seed,
        grid_n: args.grid_n,
        capture_baselines: args.capture_baselines,
    };
    let result = RunConfig::load(&args.config).and_then(|mut cfg| {
        apply_overrides(&mut cfg, &opts)?;
        run(&cfg, &opts)
    });
    match result {
        Ok(summary) => {
            report(&summary, args.quiet);
            ExitCode::from(summary.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CliError::exit_code(&e))
        }
    }
}
