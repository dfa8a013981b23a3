//! Training sets built from a trajectory.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::canon::canonical_form;
use super::detect::{change_regions, change_sets, event_from_sets};
use super::likelihood::SelectionStats;
use super::table::EventTemplate;
use super::DiscoveryError;
use crate::gna::{embed, NodeState, Trajectory};

/// One learned rewriting example `(s_t, s_t => r_t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplacementTriple {
    pub t: usize,
    /// Canonical key of the left-hand side.
    pub key: String,
    /// Canonical key of the changed core alone.
    pub core_key: String,
    pub old_nodes: usize,
    pub template: EventTemplate,
}

/// A step that was left out of training, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedStep {
    pub t: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainingSets {
    pub pairs: Vec<SelectionStats>,
    pub triples: Vec<ReplacementTriple>,
    /// Steps where nothing changed.
    pub noops: usize,
    pub skipped: Vec<SkippedStep>,
    /// States seen anywhere in the trajectory, or its alphabet if declared.
    pub states: BTreeSet<NodeState>,
}

impl TrainingSets {
    /// Empirical distribution of core sizes, `(size, probability)`.
    pub fn core_size_distribution(&self) -> Vec<(usize, f64)> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for p in &self.pairs {
            *counts.entry(p.core.len()).or_default() += 1;
        }
        let n = self.pairs.len().max(1) as f64;
        counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect()
    }
}

/// Scans `traj` step by step: detects each event, verifies that embedding
/// it reproduces the next configuration, and records one extraction pair
/// and one replacement triple per non-empty event. Steps whose change is
/// split into several disconnected regions are skipped with a warning.
pub fn build_training(traj: &Trajectory) -> Result<TrainingSets, DiscoveryError> {
    let mut out = TrainingSets::default();
    match traj.initial.alphabet() {
        Some(a) => out.states.extend(a.iter().copied()),
        None => out.states.extend(traj.initial.states().map(|(_, s)| s)),
    }
    let declared = traj.initial.alphabet().is_some();
    let mut failure: Option<DiscoveryError> = None;
    traj.replay(|t, g_t, _, g_next| {
        if failure.is_some() {
            return Ok(());
        }
        if !declared {
            out.states.extend(g_next.states().map(|(_, s)| s));
        }
        let sets = match change_sets(g_t, g_next) {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e);
                return Ok(());
            }
        };
        let event = event_from_sets(g_t, g_next, &sets)?;
        let check = embed(g_t, &event)?;
        if check != *g_next {
            failure = Some(DiscoveryError::TraceCorruption(format!("detected event at t = {t} does not replay")));
            return Ok(());
        }
        if event.is_empty() {
            out.noops += 1;
            return Ok(());
        }
        let regions = change_regions(g_t, g_next, &sets);
        if regions > 1 {
            log::warn!("step {t}: {regions} disconnected change regions; skipped");
            out.skipped.push(SkippedStep { t, reason: format!("{regions} disconnected change regions") });
            return Ok(());
        }
        let form = canonical_form(&event.old);
        let core_sub = g_t.induced(&sets.core, sets.core.iter().copied().collect())?;
        out.pairs.push(SelectionStats::new(t, g_t, &sets.core));
        out.triples.push(ReplacementTriple {
            t,
            key: form.key,
            core_key: canonical_form(&core_sub).key,
            old_nodes: event.old.node_count(),
            template: EventTemplate::from_event(&event, &form.order),
        });
        Ok(())
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
