//! `gnakit analyze`: metrics of a saved snapshot.
//!
//! A merger snapshot (nodes labelled `A`/`B` with a `culture` attribute)
//! yields `metrics.csv` with
//! `iteration,cross_firm_distance,turnover,conflict,ineffectiveness`. Any
//! other snapshot is analysed as a graph on its undirected view:
//! `summary.csv`, `nodes.csv` (`id,label,degree,closeness,harmonic_closeness`)
//! and `edges.csv` (`a,b,betweenness`).

use std::collections::BTreeMap;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use gnakit::graph::{
    closeness_centrality, connected_components, edge_betweenness, harmonic_closeness, largest_component,
    powerlaw_fit_ks, UGraph,
};
use gnakit::io::Snapshot;
use gnakit::merger::metrics;
use gnakit::MergerState;
use serde::{Deserialize, Serialize};

use super::Common;
use crate::error::{CliError, CliResult};
use crate::manifest::{load_config, Manifest, OutDir};

/// Smallest tail used when fitting a power law to the degrees.
pub const MIN_TAIL: usize = 50;

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Snapshot file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    #[default]
    Auto,
    Merger,
    Graph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub input: Option<PathBuf>,
    pub kind: Kind,
}

pub fn resolve(args: AnalyzeArgs) -> CliResult<AnalyzeConfig> {
    let mut cfg: AnalyzeConfig = load_config(args.common.config.as_deref())?;
    if args.input.is_some() {
        cfg.input = args.input;
    }
    if let Some(k) = args.kind {
        cfg.kind = k;
    }
    if cfg.input.is_none() {
        return Err(CliError::Usage("--input <snapshot> is required".into()));
    }
    Ok(cfg)
}

fn looks_like_merger(s: &Snapshot) -> bool {
    !s.nodes.is_empty() && s.nodes.iter().all(|n| (n.label == "A" || n.label == "B") && n.attrs.contains_key("culture"))
}

pub fn execute(cfg: &AnalyzeConfig, out: &Path) -> CliResult<Manifest> {
    let path = cfg.input.as_deref().expect("resolved config names an input");
    let text = fs::read_to_string(path).map_err(|e| CliError::input(path.display(), e))?;
    let snap = Snapshot::parse(&text).map_err(|e| CliError::input(path.display(), e))?;
    let kind = match cfg.kind {
        Kind::Auto if looks_like_merger(&snap) => Kind::Merger,
        Kind::Auto => Kind::Graph,
        k => k,
    };
    let mut dir = OutDir::create(out)?;
    match kind {
        Kind::Merger => {
            let state = MergerState::from_snapshot(&snap).map_err(|e| CliError::input(path.display(), e))?;
            let m = metrics(&state);
            let csv = format!(
                "iteration,cross_firm_distance,turnover,conflict,ineffectiveness\n{},{},{},{},{}\n",
                m.iteration, m.cross_firm_distance, m.turnover, m.conflict, m.ineffectiveness
            );
            dir.write("metrics.csv", csv.as_bytes())?;
        }
        _ => write_graph(&snap, &mut dir).map_err(|e| match e {
            CliError::Runtime(m) => CliError::input(path.display(), m),
            other => other,
        })?,
    }
    dir.finish("analyze", None, cfg)
}

fn write_graph(snap: &Snapshot, dir: &mut OutDir) -> CliResult<()> {
    let index: BTreeMap<u64, usize> = snap.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
    let mut edges = Vec::with_capacity(snap.links.len());
    for l in &snap.links {
        match (index.get(&l.src), index.get(&l.dst)) {
            (Some(&a), Some(&b)) => edges.push((a, b)),
            _ => return Err(CliError::Runtime(format!("link {} -> {} names an unknown node", l.src, l.dst))),
        }
    }
    let g = UGraph::from_edges(snap.nodes.len(), edges);
    let comps = connected_components(&g);
    let lcc = largest_component(&comps).map_or(0, |i| comps[i].len());
    let degrees: Vec<usize> = (0..g.node_count()).map(|v| g.degree(v)).collect();
    let gamma = powerlaw_fit_ks(&degrees, MIN_TAIL).map(|(xmin, alpha, _)| (xmin, alpha)).ok();

    let mut summary = String::from("nodes,edges,components,largest_component,powerlaw_xmin,powerlaw_gamma\n");
    let (xmin, alpha) = gamma.map_or((String::new(), String::new()), |(x, a)| (x.to_string(), format!("{a:.6}")));
    writeln!(summary, "{},{},{},{lcc},{xmin},{alpha}", g.node_count(), g.edge_count(), comps.len()).unwrap();
    dir.write("summary.csv", summary.as_bytes())?;

    if g.node_count() > 0 {
        let close: Vec<f64> = closeness_centrality(&g).map_err(CliError::runtime)?;
        let harm: Vec<f64> = harmonic_closeness(&g).map_err(CliError::runtime)?;
        let mut nodes = String::from("id,label,degree,closeness,harmonic_closeness\n");
        for (i, n) in snap.nodes.iter().enumerate() {
            writeln!(nodes, "{},{},{},{:.9},{:.9}", n.id, n.label, degrees[i], close[i], harm[i]).unwrap();
        }
        dir.write("nodes.csv", nodes.as_bytes())?;
    }
    let mut edges = String::from("a,b,betweenness\n");
    for ((a, b), eb) in edge_betweenness::<f64>(&g) {
        writeln!(edges, "{},{},{eb:.9}", snap.nodes[a].id, snap.nodes[b].id).unwrap();
    }
    dir.write("edges.csv", edges.as_bytes())?;
    Ok(())
}
