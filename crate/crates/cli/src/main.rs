//! `gnakit` command-line entry point.
//!
//! Every subcommand writes into `--out` and finishes with `manifest.json`;
//! `gnakit replay --manifest M --out D` re-runs the recorded configuration.
//! `GNAKIT_WORKERS` bounds the worker pool used by `merger`.

mod commands;
mod error;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{analyze, discover, merger, opnet, simulate};
use error::{CliError, CliResult};
use manifest::Manifest;

#[derive(Debug, Parser)]
#[command(name = "gnakit", version, about = "Graph automata: simulate, discover and analyse network dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a reference model.
    Simulate(simulate::SimulateArgs),
    /// Infer rules from an observed series.
    Discover(discover::DiscoverArgs),
    /// Grow an operational network from a scenario.
    Opnet(opnet::OpnetArgs),
    /// Sweep the merger model.
    Merger(merger::MergerArgs),
    /// Compute metrics of a snapshot.
    Analyze(analyze::AnalyzeArgs),
    /// Re-run a manifest into a fresh directory.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn configure_workers() -> CliResult<()> {
    let Ok(v) = std::env::var("GNAKIT_WORKERS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("GNAKIT_WORKERS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(CliError::runtime)
}

fn replay(path: &Path, out: &Path) -> CliResult<Manifest> {
    let m = Manifest::read(path)?;
    match m.command.as_str() {
        "simulate" => simulate::execute(&m.config_as(path)?, out),
        "discover" => discover::execute(&m.config_as(path)?, out),
        "opnet" => opnet::execute(&m.config_as(path)?, out),
        "merger" => merger::execute(&m.config_as(path)?, out),
        "analyze" => analyze::execute(&m.config_as(path)?, out),
        other => Err(CliError::input(path.display(), format!("unknown command `{other}`"))),
    }
}

fn run(cli: Cli) -> CliResult<Manifest> {
    configure_workers()?;
    match cli.command {
        Command::Simulate(a) => {
            let out = a.common.out.clone();
            simulate::execute(&simulate::resolve(a)?, &out)
        }
        Command::Discover(a) => {
            let out = a.common.out.clone();
            discover::execute(&discover::resolve(a)?, &out)
        }
        Command::Opnet(a) => {
            let out = a.common.out.clone();
            opnet::execute(&opnet::resolve(a)?, &out)
        }
        Command::Merger(a) => {
            let out = a.common.out.clone();
            merger::execute(&merger::resolve(a)?, &out)
        }
        Command::Analyze(a) => {
            let out = a.common.out.clone();
            analyze::execute(&analyze::resolve(a)?, &out)
        }
        Command::Replay { manifest, out } => replay(&manifest, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(m) => {
            log::info!("{} wrote {} artifacts", m.command, m.outputs.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gnakit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
