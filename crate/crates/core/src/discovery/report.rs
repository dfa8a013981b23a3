//! Human- and machine-readable summary of a fit.

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use serde::{Serialize, Serializer};

use super::canon::CanonicalSubgraph;
use super::{FittedModel, TrainingSets};

/// Non-finite values are written as strings so JSON stays valid.
fn real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn opt_real<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => real(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportedCandidate {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    #[serde(serialize_with = "real")]
    pub log_likelihood: f64,
    pub free_params: usize,
    #[serde(serialize_with = "real")]
    pub penalised: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub winner: String,
    pub candidates: Vec<ReportedCandidate>,
    pub events: usize,
    pub noops: usize,
    pub skipped: usize,
    pub table_keys: usize,
    pub table_events: usize,
    /// Most frequent left-hand sides.
    pub top_subgraphs: Vec<CanonicalSubgraph>,
    #[serde(serialize_with = "opt_real")]
    pub distance: Option<f64>,
}

impl FitReport {
    pub fn new(fitted: &FittedModel, ts: &TrainingSets, distance: Option<f64>) -> Self {
        let candidates = fitted
            .candidates
            .iter()
            .map(|c| ReportedCandidate {
                family: c.candidate.name().into(),
                params: c.family.params().into_iter().collect(),
                log_likelihood: c.log_likelihood,
                free_params: c.free_params,
                penalised: c.penalised,
            })
            .collect();
        let mut top: Vec<CanonicalSubgraph> = fitted
            .table
            .entries
            .iter()
            .map(|(k, v)| CanonicalSubgraph {
                key: k.clone(),
                nodes: node_count(k),
                count: v.iter().map(|e| e.count).sum(),
            })
            .collect();
        top.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.key.cmp(&b.key)));
        top.truncate(10);
        FitReport {
            winner: fitted.best().candidate.name().into(),
            candidates,
            events: ts.pairs.len(),
            noops: ts.noops,
            skipped: ts.skipped.len(),
            table_keys: fitted.table.len(),
            table_events: fitted.table.event_count(),
            top_subgraphs: top,
            distance,
        }
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

/// Node count encoded in a key (`E3:...`, `W12:...`).
fn node_count(key: &str) -> usize {
    key[1..].split(':').next().and_then(|n| n.parse().ok()).unwrap_or(0)
}

impl fmt::Display for FitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "winner: {}", self.winner)?;
        writeln!(f, "events: {} (no-ops {}, skipped {})", self.events, self.noops, self.skipped)?;
        writeln!(f, "candidates:")?;
        for c in &self.candidates {
            let mut params = String::new();
            for (k, v) in &c.params {
                write!(params, " {k}={v:.6}").unwrap();
            }
            writeln!(
                f,
                "  {:<13} loglik={:.6} penalised={:.6} k={}{}",
                c.family, c.log_likelihood, c.penalised, c.free_params, params
            )?;
        }
        writeln!(f, "replacement table: {} keys, {} events", self.table_keys, self.table_events)?;
        for s in &self.top_subgraphs {
            writeln!(f, "  {:>6}  {}", s.count, s.key)?;
        }
        if let Some(d) = self.distance {
            writeln!(f, "bhattacharyya distance: {d:.6}")?;
        }
        Ok(())
    }
}
