//! `gnakit discover`: infer an automaton from an observed network series.
//!
//! The input is a trajectory file, or a series of GraphML files in time
//! order. Outputs: `report.txt`, `report.json` and, when reconstruction is
//! requested, `reconstruction.gnat` (snapshot format) or
//! `reconstruction.csv` (`step,nodes,links`).

use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use gnakit::discovery::{
    build_training, detect_event, fit_from_training, reconstruct_and_score, Candidate, FitReport, LookupMode,
};
use gnakit::gna::{embed_in_place, Trajectory};
use gnakit::io::{parse_trajectory, trajectory_to_text, GraphmlImporter};
use gnakit::rng::seeded;
use serde::{Deserialize, Serialize};

use super::{Common, Format};
use crate::error::{CliError, CliResult};
use crate::manifest::{load_config, require_seed, Manifest, OutDir};

#[derive(Debug, Clone, Args)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub common: Common,
    /// Trajectory file written by `simulate`.
    #[arg(long, conflicts_with = "graphml")]
    pub input: Option<PathBuf>,
    /// GraphML snapshots in time order.
    #[arg(long, num_args = 1..)]
    pub graphml: Vec<PathBuf>,
    /// Node attribute holding the state in GraphML input.
    #[arg(long)]
    pub state_key: Option<String>,
    /// Candidate families, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub candidates: Option<Vec<String>>,
    /// Replacement lookup for left-hand sides with several outcomes.
    #[arg(long)]
    pub mode: Option<LookupModeArg>,
    /// Simulate the fitted model for this many steps and report D_B.
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum LookupModeArg {
    Deterministic,
    FrequencyWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscoverConfig {
    pub input: Option<PathBuf>,
    pub graphml: Vec<PathBuf>,
    pub state_key: String,
    pub candidates: Vec<Candidate>,
    pub mode: LookupMode,
    /// Reconstruction length; 0 skips reconstruction.
    pub steps: usize,
    pub seed: Option<u64>,
    pub format: Format,
}

impl Default for DiscoverConfig {
    fn default() -> Self {
        DiscoverConfig {
            input: None,
            graphml: Vec::new(),
            state_key: "state".into(),
            candidates: Candidate::DEFAULT.to_vec(),
            mode: LookupMode::Deterministic,
            steps: 0,
            seed: None,
            format: Format::Snapshot,
        }
    }
}

pub fn resolve(args: DiscoverArgs) -> CliResult<DiscoverConfig> {
    let mut cfg: DiscoverConfig = load_config(args.common.config.as_deref())?;
    if args.input.is_some() {
        cfg.input = args.input;
        cfg.graphml.clear();
    }
    if !args.graphml.is_empty() {
        cfg.graphml = args.graphml;
        cfg.input = None;
    }
    if let Some(k) = args.state_key {
        cfg.state_key = k;
    }
    if let Some(names) = args.candidates {
        cfg.candidates = names
            .iter()
            .map(|n| Candidate::from_name(n.trim()).map_err(|e| CliError::Usage(format!("--candidates: {e}"))))
            .collect::<CliResult<_>>()?;
    }
    if let Some(m) = args.mode {
        cfg.mode = match m {
            LookupModeArg::Deterministic => LookupMode::Deterministic,
            LookupModeArg::FrequencyWeighted => LookupMode::FrequencyWeighted,
        };
    }
    if let Some(s) = args.steps {
        cfg.steps = s;
    }
    if args.common.seed.is_some() {
        cfg.seed = args.common.seed;
    }
    if let Some(f) = args.common.format {
        cfg.format = f;
    }
    if cfg.input.is_none() && cfg.graphml.is_empty() {
        return Err(CliError::Usage("pass --input <trajectory> or --graphml <files...>".into()));
    }
    if cfg.candidates.is_empty() {
        return Err(CliError::Usage("at least one candidate family is required".into()));
    }
    Ok(cfg)
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(path.display(), e))
}

/// Loads the observed series as a trajectory whose events are detected from
/// consecutive snapshots.
pub fn load_series(cfg: &DiscoverConfig) -> CliResult<Trajectory> {
    if let Some(path) = &cfg.input {
        return parse_trajectory(&read(path)?).map_err(|e| CliError::input(path.display(), e));
    }
    let mut importer = GraphmlImporter::new(&cfg.state_key);
    let mut configs = Vec::with_capacity(cfg.graphml.len());
    for path in &cfg.graphml {
        configs.push(importer.import_config(&read(path)?).map_err(|e| CliError::input(path.display(), e))?);
    }
    let mut it = configs.into_iter();
    let first = it.next().ok_or_else(|| CliError::Usage("empty GraphML series".into()))?;
    let mut traj = Trajectory::new(first);
    for (t, next) in it.enumerate() {
        let ev =
            detect_event(&traj.final_config, &next).map_err(|e| CliError::input(cfg.graphml[t + 1].display(), e))?;
        traj.events.push(ev);
        traj.final_config = next;
    }
    Ok(traj)
}

pub fn execute(cfg: &DiscoverConfig, out: &Path) -> CliResult<Manifest> {
    let stochastic = cfg.steps > 0;
    let seed = if stochastic { Some(require_seed(cfg.seed, "reconstruction")?) } else { cfg.seed };
    let traj = load_series(cfg)?;
    let ts = build_training(&traj).map_err(CliError::runtime)?;
    let fitted = fit_from_training(&ts, traj.initial.clone(), &cfg.candidates, cfg.mode).map_err(CliError::runtime)?;
    log::info!("winner: {}", fitted.best().candidate.name());

    let mut dir = OutDir::create(out)?;
    let mut distance = None;
    if let Some(seed) = seed.filter(|_| stochastic) {
        let rec = reconstruct_and_score(&fitted, &traj, cfg.steps, &mut seeded(seed)).map_err(CliError::runtime)?;
        distance = Some(rec.distance);
        match cfg.format {
            Format::Snapshot => dir.write("reconstruction.gnat", trajectory_to_text(&rec.trajectory).as_bytes())?,
            Format::Csv => {
                let mut csv = String::from("step,nodes,links\n");
                let mut cur = rec.trajectory.initial.clone();
                writeln!(csv, "0,{},{}", cur.node_count(), cur.link_count()).unwrap();
                for (t, ev) in rec.trajectory.events.iter().enumerate() {
                    embed_in_place(&mut cur, ev).map_err(CliError::runtime)?;
                    writeln!(csv, "{},{},{}", t + 1, cur.node_count(), cur.link_count()).unwrap();
                }
                dir.write("reconstruction.csv", csv.as_bytes())?;
            }
        }
    }
    let report = FitReport::new(&fitted, &ts, distance);
    dir.write("report.txt", report.to_text().as_bytes())?;
    let mut json = serde_json::to_string_pretty(&report).map_err(CliError::runtime)?;
    json.push('\n');
    dir.write("report.json", json.as_bytes())?;
    dir.finish("discover", seed, cfg)
}
