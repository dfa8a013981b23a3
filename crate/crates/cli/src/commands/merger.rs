//! `gnakit merger`: sweep the merger model over a `w x b` grid.
//!
//! Output `runs.csv` is long format with columns
//! `condition,seed,iteration,cross_firm_distance,turnover,conflict,ineffectiveness`;
//! `seed` is the replicate index. With `snapshots = true` (and
//! `--format snapshot`) each run's final network is written to
//! `snapshots/<condition>-run<r>.snap`.
//!
//! Replicate `r` of condition `c` draws from stream `c * 2^32 + r` of the run
//! seed, so results do not depend on the worker count.

use std::path::Path;

use clap::Args;
use gnakit::merger::{condition_label, run_recording, CSV_HEADER};
use gnakit::rng::split;
use gnakit::{MergerParams, MergerRun};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Common, Format};
use crate::error::{CliError, CliResult};
use crate::manifest::{load_config, require_seed, Manifest, OutDir};

#[derive(Debug, Clone, Args)]
pub struct MergerArgs {
    #[command(flatten)]
    pub common: Common,
    /// Within-firm concentrations, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub w: Option<Vec<f64>>,
    /// Between-firm concentrations, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub b: Option<Vec<f64>>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Replicates per condition.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Record metrics every k iterations (the last one is always recorded).
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Write each run's final network.
    #[arg(long)]
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MergerConfig {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub record_every: usize,
    pub snapshots: bool,
    pub seed: Option<u64>,
    pub format: Format,
    /// Model overrides; `w` and `b` here are replaced by the grid values.
    pub params: MergerParams,
}

impl Default for MergerConfig {
    fn default() -> Self {
        MergerConfig {
            w: vec![1.0, 3.0, 5.0, 10.0, 20.0, 30.0],
            b: vec![0.1, 0.5, 1.0, 3.0, 5.0],
            record_every: 1,
            snapshots: false,
            seed: None,
            format: Format::Csv,
            params: MergerParams::default(),
        }
    }
}

pub fn resolve(args: MergerArgs) -> CliResult<MergerConfig> {
    let mut cfg: MergerConfig = load_config(args.common.config.as_deref())?;
    if let Some(w) = args.w {
        cfg.w = w;
    }
    if let Some(b) = args.b {
        cfg.b = b;
    }
    if let Some(i) = args.iterations {
        cfg.params.iterations = i;
    }
    if let Some(r) = args.runs {
        cfg.params.runs = r;
    }
    if let Some(k) = args.record_every {
        cfg.record_every = k;
    }
    cfg.snapshots |= args.snapshots;
    if args.common.seed.is_some() {
        cfg.seed = args.common.seed;
    }
    if let Some(f) = args.common.format {
        cfg.format = f;
    }
    if cfg.w.is_empty() || cfg.b.is_empty() {
        return Err(CliError::Usage("the w and b grids must be non-empty".into()));
    }
    if cfg.record_every == 0 {
        return Err(CliError::Usage("record_every must be positive".into()));
    }
    Ok(cfg)
}

pub fn stream(condition: usize, replicate: usize) -> u64 {
    ((condition as u64) << 32) | replicate as u64
}

pub fn execute(cfg: &MergerConfig, out: &Path) -> CliResult<Manifest> {
    let seed = require_seed(cfg.seed, "merger")?;
    let conditions: Vec<(f64, f64)> = cfg.w.iter().flat_map(|&w| cfg.b.iter().map(move |&b| (w, b))).collect();
    for &(w, b) in &conditions {
        MergerParams { w, b, ..cfg.params.clone() }.validate().map_err(|e| CliError::Model(e.to_string()))?;
    }
    let runs = cfg.params.runs;
    let jobs: Vec<(usize, usize)> = (0..conditions.len()).flat_map(|c| (0..runs).map(move |r| (c, r))).collect();
    log::info!("{} conditions x {runs} runs on {} workers", conditions.len(), rayon::current_num_threads());
    let results: Vec<MergerRun> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let (w, b) = conditions[c];
            let p = MergerParams { w, b, ..cfg.params.clone() };
            run_recording(&p, &mut split(seed, stream(c, r)), cfg.record_every)
        })
        .collect::<Result<_, _>>()
        .map_err(CliError::runtime)?;

    let mut dir = OutDir::create(out)?;
    let mut csv = format!("{CSV_HEADER}\n");
    for (&(c, r), run) in jobs.iter().zip(&results) {
        let label = condition_label(conditions[c].0, conditions[c].1);
        for m in &run.series {
            csv.push_str(&m.csv_row(&label, r as u64));
            csv.push('\n');
        }
    }
    dir.write("runs.csv", csv.as_bytes())?;
    if cfg.snapshots && cfg.format == Format::Snapshot {
        for (&(c, r), run) in jobs.iter().zip(&results) {
            let label = condition_label(conditions[c].0, conditions[c].1);
            dir.write(&format!("snapshots/{label}-run{r}.snap"), run.state.to_snapshot().to_text().as_bytes())?;
        }
    }
    dir.finish("merger", Some(seed), cfg)
}
