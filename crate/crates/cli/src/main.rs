//! `gibbs-lines`: config-driven runner for the line-ensemble verification
//! experiments. Writes `<prefix>.report.json` and `<prefix>.raw.csv`;
//! exit codes: 0 all declared tolerances pass, 1 a tolerance failed,
//! 2 configuration error, 3 compute budget exceeded, 4 degenerate estimate.

mod config;
mod experiments;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gibbs_lines_core::Error;

use config::Config;
use experiments::{find, validate_config, RunContext};

#[derive(Parser)]
#[command(
    name = "gibbs-lines",
    about = "Monte Carlo verification experiments for H-Brownian Gibbs line ensembles"
)]
struct Cli {
    /// Experiment name (see `--help` output of the registry on error).
    experiment: String,
    /// Flat key=value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path prefix (overrides config key `output`; default `out`).
    #[arg(long)]
    out: Option<String>,
    /// Worker thread count (fallback: env GIBBS_LINES_THREADS, then 1).
    #[arg(long)]
    threads: Option<usize>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) | Error::Unsupported(_) => 2,
        Error::BudgetExceeded(_) => 3,
        Error::DegenerateEstimate(_) => 4,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", cli.config.display())))?;
    let mut cfg = Config::parse(&text)?;
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed);
    }
    let prefix = cli
        .out
        .clone()
        .unwrap_or_else(|| cfg.get_str_or("output", "out").to_string());

    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("GIBBS_LINES_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1)
        .max(1);

    let experiment = find(&cli.experiment)?;
    validate_config(experiment.as_ref(), &cfg)?;
    let outcome = experiment.run(&cfg, &RunContext { threads })?;

    let json = serde_json::to_string_pretty(&outcome.reports)
        .map_err(|e| Error::invalid(format!("report serialization: {e}")))?;
    fs::write(format!("{prefix}.report.json"), json + "\n")
        .map_err(|e| Error::invalid(format!("cannot write report: {e}")))?;

    let mut csv = outcome.csv_header.clone();
    csv.push('\n');
    for row in &outcome.csv_rows {
        csv.push_str(row);
        csv.push('\n');
    }
    fs::write(format!("{prefix}.raw.csv"), csv)
        .map_err(|e| Error::invalid(format!("cannot write csv: {e}")))?;

    for report in &outcome.reports {
        let status = match report.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "info",
        };
        println!(
            "{status}  {}  value={:.6e}  se={:.3e}",
            report.name, report.value, report.standard_error
        );
    }
    Ok(outcome.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
