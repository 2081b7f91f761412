use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use tracing::error;
use tracing_subscriber::EnvFilter;
use verscan::commands::{analyze, correlate, extract, report, satd, slither};
use verscan::config::DEFAULT_WORKERS;
use verscan::demo::DemoWorld;
use verscan::{Outcome, RunConfig};
use verscan_core::gateway::DEFAULT_API_URL;
use verscan_core::linker::DEFAULT_MAX_VERSIONS;
use verscan_core::metrics::Level;

#[derive(Parser, Debug)]
#[command(version, about = "Collect and analyse versioned smart contracts")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Input path: seed dataset, store root, metrics file or report directory
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// File with one explorer API key per line
    #[arg(long, global = true)]
    keys: Option<PathBuf>,

    /// Parallel workers over disjoint seed slices
    #[arg(long, global = true, default_value_t = DEFAULT_WORKERS)]
    workers: usize,

    /// Families with more versions than this are excluded
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_VERSIONS)]
    max_versions: usize,

    /// Replay explorer responses from this fixture directory
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,

    /// Metrics granularity
    #[arg(long, global = true, default_value = "file")]
    level: Level,

    /// Debt keyword list, one phrase per line
    #[arg(long, global = true)]
    keywords: Option<PathBuf>,

    /// Vulnerability report (JSON array of per-contract findings)
    #[arg(long, global = true)]
    vulns: Option<PathBuf>,

    /// Explorer API endpoint
    #[arg(long, global = true, default_value = DEFAULT_API_URL)]
    api_url: String,

    /// Save live explorer responses here as fixtures
    #[arg(long, global = true)]
    record: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Build version families from seed contracts and store them
    Extract,
    /// Compute code metrics for every source file under --input
    Analyze,
    /// Track self-admitted technical debt across stored versions
    Satd,
    /// Correlate metrics with vulnerability totals
    Correlate,
    /// Summarise the store: histogram, vulnerability timelines, debt
    Report,
    /// Convert a directory of Slither JSON outputs into a vulnerability report
    IngestSlither,
    /// Write the offline demo world (fixtures, seeds, report) to --output
    Demo,
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let input = match cli.command {
        Command::Demo => PathBuf::new(),
        _ => cli.input.clone().context("--input is required")?,
    };
    let output = cli.output.clone().context("--output is required")?;
    let cfg = RunConfig {
        input,
        output,
        keys: cli.keys.clone(),
        workers: cli.workers,
        max_versions: cli.max_versions,
        fixtures: cli.fixtures.clone(),
        keywords: cli.keywords.clone(),
        vulns: cli.vulns.clone(),
        level: cli.level,
        api_url: cli.api_url.clone(),
        record: cli.record.clone(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = config(cli)?;
    match cli.command {
        Command::Extract => extract::run(&cfg).map(|(_, o)| o),
        Command::Analyze => analyze::run(&cfg),
        Command::Satd => satd::run(&cfg),
        Command::Correlate => correlate::run(&cfg).map(|(_, o)| o),
        Command::Report => report::run(&cfg).map(|(_, o)| o),
        Command::IngestSlither => slither::run(&cfg),
        Command::Demo => {
            DemoWorld::build().write(&cfg.output)?;
            Ok(Outcome::Success)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .json()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            error!(error = %format!("{e:#}"), command = ?cli.command, "command failed");
            ExitCode::from(1)
        }
    }
}
