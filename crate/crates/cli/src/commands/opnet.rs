//! `gnakit opnet`: grow an operational network from a scenario.
//!
//! Outputs: `metrics.csv` (one row per tick), `transfers.csv`
//! (`tick,event,from,to,var,value`), `centrality.csv` (`agent,degree_centrality`)
//! and, with `--format snapshot`, `final.snap`.

use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use gnakit::opnet::{audit_causality, run_to_quiescence, Scenario, METRICS_HEADER, SAR_DEMO};
use gnakit::rng::seeded;
use serde::{Deserialize, Serialize};

use super::{Common, Format};
use crate::error::{CliError, CliResult};
use crate::manifest::{load_config, require_seed, Manifest, OutDir};

/// Scenario name that selects the bundled search-and-rescue demo.
pub const DEMO: &str = "demo";

#[derive(Debug, Clone, Args)]
pub struct OpnetArgs {
    #[command(flatten)]
    pub common: Common,
    /// Scenario file, or `demo` for the bundled scenario.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Tick budget; overrides the scenario's own limit.
    #[arg(long, alias = "max-ticks")]
    pub steps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OpnetConfig {
    pub scenario: Option<PathBuf>,
    pub steps: Option<u64>,
    pub seed: Option<u64>,
    pub format: Format,
}

pub fn resolve(args: OpnetArgs) -> CliResult<OpnetConfig> {
    let mut cfg: OpnetConfig = load_config(args.common.config.as_deref())?;
    if args.scenario.is_some() {
        cfg.scenario = args.scenario;
    }
    if args.steps.is_some() {
        cfg.steps = args.steps;
    }
    if args.common.seed.is_some() {
        cfg.seed = args.common.seed;
    }
    if let Some(f) = args.common.format {
        cfg.format = f;
    }
    if cfg.scenario.is_none() {
        return Err(CliError::Usage(format!("--scenario <file> is required (or `{DEMO}`)")));
    }
    Ok(cfg)
}

fn load(path: &Path) -> CliResult<Scenario> {
    if path.as_os_str() == DEMO {
        return Scenario::parse(SAR_DEMO).map_err(|e| CliError::input(DEMO, e));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::input(path.display(), e))?;
    Scenario::parse(&text).map_err(|e| CliError::input(path.display(), e))
}

pub fn execute(cfg: &OpnetConfig, out: &Path) -> CliResult<Manifest> {
    let sc = load(cfg.scenario.as_deref().expect("resolved config names a scenario"))?;
    let stochastic = sc.events.iter().any(|e| e.variation > 0);
    let seed = if stochastic { Some(require_seed(cfg.seed, "a scenario with duration variation")?) } else { cfg.seed };
    let mut rng = seeded(seed.unwrap_or(0));
    let outcome = run_to_quiescence(&sc, &mut rng, cfg.steps.unwrap_or(sc.max_ticks), |_| {});
    audit_causality(&sc, &outcome.state).map_err(CliError::runtime)?;
    if outcome.truncated {
        log::warn!("tick budget exhausted after {} ticks before quiescence", outcome.ticks);
    }

    let mut dir = OutDir::create(out)?;
    let mut metrics = format!("{METRICS_HEADER}\n");
    for m in &outcome.series {
        metrics.push_str(&m.csv_row());
        metrics.push('\n');
    }
    dir.write("metrics.csv", metrics.as_bytes())?;

    let mut transfers = String::from("tick,event,from,to,var,value\n");
    for t in &outcome.state.transfers {
        let value = t.value.to_string().replace('"', "\"\"");
        writeln!(
            transfers,
            "{},{},{},{},{},\"{value}\"",
            t.tick, t.event, sc.agents[t.from].name, sc.agents[t.to].name, t.var
        )
        .unwrap();
    }
    dir.write("transfers.csv", transfers.as_bytes())?;

    let mut centrality = String::from("agent,degree_centrality\n");
    for (v, c) in outcome.state.degree_centrality() {
        writeln!(centrality, "{},{c:.6}", sc.agents[v].name).unwrap();
    }
    dir.write("centrality.csv", centrality.as_bytes())?;

    if cfg.format == Format::Snapshot {
        dir.write("final.snap", outcome.state.snapshot(&sc).to_text().as_bytes())?;
    }
    dir.finish("opnet", seed, cfg)
}
