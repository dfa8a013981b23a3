//! Replacement rule table learned from detected events.

use std::collections::BTreeMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::canon::canonical_form;
use crate::gna::{
    weighted_draws, GnaError, LinkState, MechanismInfo, Mode, NodeId, NodeState, Replacement, RewriteEvent, SubGna,
};

/// A node of the right-hand side of a rule.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TemplateNode {
    /// Canonical position of the corresponding old node, if any.
    pub from: Option<usize>,
    pub state: NodeState,
    pub seed: bool,
}

/// A rewriting event expressed in canonical positions of its left-hand
/// side, so it can be applied to any isomorphic sub-network.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventTemplate {
    /// Corresponded nodes first (by old position), then fresh nodes.
    pub nodes: Vec<TemplateNode>,
    /// `(src, dst, state)` over indices of `nodes`, sorted.
    pub links: Vec<(usize, usize, LinkState)>,
}

impl EventTemplate {
    /// Expresses `event` relative to the canonical order `order` of its old
    /// sub-network.
    pub fn from_event(event: &RewriteEvent, order: &[NodeId]) -> Self {
        let pos_old = |v: NodeId| order.iter().position(|&x| x == v);
        let seeds = event.new.seeds();
        let back: BTreeMap<NodeId, NodeId> = event.correspondence.iter().map(|(a, b)| (*b, *a)).collect();
        let mut mapped: Vec<(usize, NodeId)> = Vec::new();
        let mut fresh: Vec<NodeId> = Vec::new();
        for v in event.new.node_ids() {
            match back.get(&v).and_then(|&o| pos_old(o)) {
                Some(p) => mapped.push((p, v)),
                None => fresh.push(v),
            }
        }
        mapped.sort_unstable();
        // fresh nodes by state, then by their links to mapped nodes
        let sig = |v: NodeId| {
            let mut s: Vec<(usize, usize, u32)> = Vec::new();
            for (a, l) in event.new.links() {
                if a == v {
                    if let Some(&(p, _)) = mapped.iter().find(|(_, x)| *x == l.dst) {
                        s.push((0, p, l.state.0));
                    }
                } else if l.dst == v {
                    if let Some(&(p, _)) = mapped.iter().find(|(_, x)| *x == a) {
                        s.push((1, p, l.state.0));
                    }
                }
            }
            s.sort_unstable();
            (event.new.state(v).unwrap(), s, v)
        };
        fresh.sort_by_cached_key(|&v| sig(v));
        let new_order: Vec<NodeId> = mapped.iter().map(|&(_, v)| v).chain(fresh.iter().copied()).collect();
        let nodes = mapped
            .iter()
            .map(|&(p, v)| (Some(p), v))
            .chain(fresh.iter().map(|&v| (None, v)))
            .map(|(from, v)| TemplateNode { from, state: event.new.state(v).unwrap(), seed: seeds.contains(&v) })
            .collect();
        let idx = |v: NodeId| new_order.iter().position(|&x| x == v).unwrap();
        let mut links: Vec<(usize, usize, LinkState)> =
            event.new.links().map(|(a, l)| (idx(a), idx(l.dst), l.state)).collect();
        links.sort_unstable();
        EventTemplate { nodes, links }
    }

    /// Instantiates the template on `sub`, whose canonical order is `order`.
    /// Fresh nodes get ids from `sub.fresh_id(0)` upwards.
    pub fn apply(&self, sub: &SubGna, order: &[NodeId]) -> Result<RewriteEvent, GnaError> {
        let mut new = SubGna::empty(sub.id_base());
        let mut ids = Vec::with_capacity(self.nodes.len());
        let mut correspondence = BTreeMap::new();
        let mut k = 0;
        for n in &self.nodes {
            let id = match n.from {
                Some(p) => {
                    let v = *order
                        .get(p)
                        .ok_or_else(|| GnaError::InvalidEvent(format!("template position {p} outside sub")))?;
                    correspondence.insert(v, v);
                    v
                }
                None => {
                    k += 1;
                    sub.fresh_id(k - 1)
                }
            };
            new.insert_node(id, n.state)?;
            ids.push(id);
        }
        for &(a, b, ls) in &self.links {
            new.add_link(ids[a], ids[b], ls)?;
        }
        new.set_seeds(self.nodes.iter().zip(&ids).filter(|(n, _)| n.seed).map(|(_, &v)| v).collect());
        Ok(RewriteEvent { old: sub.clone(), new, correspondence })
    }

    pub fn node_delta(&self, old_nodes: usize) -> isize {
        self.nodes.len() as isize - old_nodes as isize
    }
}

/// How a left-hand side with several recorded outcomes is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LookupMode {
    /// The most frequent outcome (ties: first in template order).
    #[default]
    Deterministic,
    /// An outcome drawn with probability proportional to its frequency.
    FrequencyWeighted,
}

/// Outcomes seen for one left-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub template: EventTemplate,
    pub count: usize,
}

/// Canonical left-hand-side key -> observed outcomes, most frequent first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ReplacementTable {
    pub mode: LookupMode,
    pub entries: BTreeMap<String, Vec<TableEntry>>,
}

impl ReplacementTable {
    pub fn new(mode: LookupMode) -> Self {
        ReplacementTable { mode, entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, key: String, template: EventTemplate) {
        let list = self.entries.entry(key).or_default();
        match list.iter_mut().find(|e| e.template == template) {
            Some(e) => e.count += 1,
            None => list.push(TableEntry { template, count: 1 }),
        }
        list.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.template.cmp(&b.template)));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of recorded events.
    pub fn event_count(&self) -> usize {
        self.entries.values().flatten().map(|e| e.count).sum()
    }

    /// Looks up the outcome for `sub`; unseen left-hand sides give the
    /// identity event.
    pub fn lookup(&self, sub: &SubGna, rng: &mut dyn RngCore) -> Result<RewriteEvent, GnaError> {
        let form = canonical_form(sub);
        let Some(list) = self.entries.get(&form.key) else {
            return Ok(RewriteEvent::identity(sub));
        };
        let entry = match self.mode {
            LookupMode::Deterministic => &list[0],
            LookupMode::FrequencyWeighted => {
                let w: Vec<f64> = list.iter().map(|e| e.count as f64).collect();
                &list[weighted_draws(&w, 1, rng)[0]]
            }
        };
        entry.template.apply(sub, &form.order)
    }
}

impl Replacement for ReplacementTable {
    fn info(&self) -> MechanismInfo {
        let mode = match self.mode {
            LookupMode::Deterministic => Mode::Deterministic,
            LookupMode::FrequencyWeighted => Mode::Stochastic,
        };
        MechanismInfo::replacement("rule-table", mode, vec![("entries".into(), self.len() as f64)])
    }

    fn rewrite(&self, sub: &SubGna, rng: &mut dyn RngCore) -> Result<Option<RewriteEvent>, GnaError> {
        self.lookup(sub, rng).map(Some)
    }

    fn identity_fallback(&self) -> bool {
        true
    }
}
