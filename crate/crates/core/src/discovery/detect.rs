//! Recovering the rewriting event between two successive configurations.

use std::collections::BTreeSet;

use super::DiscoveryError;
use crate::gna::{GnaConfig, NodeId, RewriteEvent};

/// Node sets of a detected event.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChangeSets {
    /// Nodes of `g_t` that disappeared or whose state or adjacency changed.
    pub core: BTreeSet<NodeId>,
    /// `core` plus the in-neighbours of `core` in `g_t`.
    pub old: BTreeSet<NodeId>,
    /// Surviving nodes of `old` plus the nodes that appeared.
    pub new: BTreeSet<NodeId>,
    pub appeared: BTreeSet<NodeId>,
}

/// Computes the change sets of the step `g_t -> g_next`.
///
/// A node counts as changed when its state, its out-links or its in-links
/// differ. Counting in-links makes every node adjacent to a new node part of
/// the core, so every link that changes lies inside the event and bridges
/// are carried over unchanged.
pub fn change_sets(g_t: &GnaConfig, g_next: &GnaConfig) -> Result<ChangeSets, DiscoveryError> {
    let mut core = BTreeSet::new();
    for v in g_t.node_ids() {
        if !g_next.contains(v)
            || g_t.state(v) != g_next.state(v)
            || g_t.out_links(v) != g_next.out_links(v)
            || g_t.in_links(v) != g_next.in_links(v)
        {
            core.insert(v);
        }
    }
    let mut appeared = BTreeSet::new();
    for v in g_next.node_ids() {
        if !g_t.contains(v) {
            if v.0 < g_t.next_id() {
                return Err(DiscoveryError::TraceCorruption(format!(
                    "node {v} appears at t = {} with an id issued before",
                    g_t.time()
                )));
            }
            appeared.insert(v);
        }
    }
    let mut old = core.clone();
    for &v in &core {
        old.extend(g_t.in_links(v).iter().map(|l| l.dst));
    }
    let mut new: BTreeSet<NodeId> = old.iter().copied().filter(|v| g_next.contains(*v)).collect();
    new.extend(appeared.iter().copied());
    Ok(ChangeSets { core, old, new, appeared })
}

/// Detects the rewriting event `g_t => g_next`.
///
/// The old sub-network is induced on the changed core and its in-neighbours,
/// with the core as seeds; the new one on its survivors plus every node that
/// appeared. The correspondence is the identity on nodes present in both.
/// Identical configurations give the empty event.
pub fn detect_event(g_t: &GnaConfig, g_next: &GnaConfig) -> Result<RewriteEvent, DiscoveryError> {
    let sets = change_sets(g_t, g_next)?;
    Ok(event_from_sets(g_t, g_next, &sets)?)
}

pub(crate) fn event_from_sets(
    g_t: &GnaConfig,
    g_next: &GnaConfig,
    sets: &ChangeSets,
) -> Result<RewriteEvent, crate::gna::GnaError> {
    let old = g_t.induced(&sets.old, sets.core.iter().copied().collect())?;
    let mut new_seeds: Vec<NodeId> = sets.core.iter().copied().filter(|v| g_next.contains(*v)).collect();
    new_seeds.extend(sets.appeared.iter().copied());
    let mut new = g_next.induced(&sets.new, new_seeds)?.interior();
    new.id_base = g_t.next_id();
    Ok(RewriteEvent::with_shared_identity(old, new))
}

/// Number of connected regions of change: components of the core plus the
/// appeared nodes, linked by the links of either configuration.
pub fn change_regions(g_t: &GnaConfig, g_next: &GnaConfig, sets: &ChangeSets) -> usize {
    let nodes: Vec<NodeId> = sets.core.union(&sets.appeared).copied().collect();
    let index = |v: NodeId| nodes.binary_search(&v).ok();
    let mut arcs = Vec::new();
    for (i, &v) in nodes.iter().enumerate() {
        for g in [g_t, g_next] {
            for l in g.out_links(v) {
                if let Some(j) = index(l.dst) {
                    arcs.push((i, j));
                }
            }
        }
    }
    crate::graph::weakly_connected_components(nodes.len(), arcs).len()
}
