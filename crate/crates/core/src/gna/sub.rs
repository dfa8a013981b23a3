use std::collections::{BTreeMap, BTreeSet};

use super::config::{Link, LinkState, NodeId, NodeState};
use super::GnaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BridgeDir {
    /// `inner -> outer`
    Out,
    /// `outer -> inner`
    In,
}

/// A link crossing the boundary of an extracted sub-network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bridge {
    pub inner: NodeId,
    pub outer: NodeId,
    pub dir: BridgeDir,
    pub state: LinkState,
}

/// A sub-network (subGNA): induced nodes, their internal links and the
/// bridge links into the rest of the network.
///
/// `seeds` lists the nodes the extraction mechanism actually chose; the
/// remaining nodes are context. `id_base` is the parent configuration's id
/// watermark at extraction time, so replacement rules can allocate fresh ids
/// without seeing the whole network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubGna {
    pub(crate) nodes: BTreeMap<NodeId, NodeState>,
    pub(crate) links: BTreeMap<NodeId, Vec<Link>>,
    pub(crate) bridges: Vec<Bridge>,
    pub(crate) seeds: Vec<NodeId>,
    pub(crate) id_base: u64,
}

impl SubGna {
    pub fn empty(id_base: u64) -> Self {
        SubGna { nodes: BTreeMap::new(), links: BTreeMap::new(), bridges: Vec::new(), seeds: Vec::new(), id_base }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn node_set(&self) -> BTreeSet<NodeId> {
        self.nodes.keys().copied().collect()
    }

    pub fn states(&self) -> impl Iterator<Item = (NodeId, NodeState)> + '_ {
        self.nodes.iter().map(|(i, s)| (*i, *s))
    }

    pub fn state(&self, id: NodeId) -> Option<NodeState> {
        self.nodes.get(&id).copied()
    }

    /// Internal outgoing links of `id`, sorted.
    pub fn out_links(&self, id: NodeId) -> &[Link] {
        self.links.get(&id).map_or(&[], Vec::as_slice)
    }

    /// All internal links as `(source, link)` in canonical order.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, Link)> + '_ {
        self.links.iter().flat_map(|(id, ls)| ls.iter().map(move |l| (*id, *l)))
    }

    pub fn link_count(&self) -> usize {
        self.links.values().map(Vec::len).sum()
    }

    /// Internal links pointing at `id`, as `(source, state)`.
    pub fn in_links(&self, id: NodeId) -> Vec<(NodeId, LinkState)> {
        self.links().filter(|(_, l)| l.dst == id).map(|(s, l)| (s, l.state)).collect()
    }

    pub fn bridges(&self) -> &[Bridge] {
        &self.bridges
    }

    pub fn seeds(&self) -> &[NodeId] {
        &self.seeds
    }

    pub fn id_base(&self) -> u64 {
        self.id_base
    }

    /// The `k`-th id that is guaranteed unused in the parent configuration.
    pub fn fresh_id(&self, k: u64) -> NodeId {
        NodeId(self.id_base + k)
    }

    /// Copy of the interior (nodes, links, seeds) without bridges: the usual
    /// starting point for building a replacement.
    pub fn interior(&self) -> SubGna {
        SubGna {
            nodes: self.nodes.clone(),
            links: self.links.clone(),
            bridges: Vec::new(),
            seeds: self.seeds.clone(),
            id_base: self.id_base,
        }
    }

    pub fn insert_node(&mut self, id: NodeId, state: NodeState) -> Result<(), GnaError> {
        if self.nodes.insert(id, state).is_some() {
            return Err(GnaError::DuplicateNode(id));
        }
        self.links.insert(id, Vec::new());
        Ok(())
    }

    pub fn set_state(&mut self, id: NodeId, state: NodeState) -> Result<(), GnaError> {
        let s = self.nodes.get_mut(&id).ok_or(GnaError::UnknownNode(id))?;
        *s = state;
        Ok(())
    }

    pub fn add_link(&mut self, src: NodeId, dst: NodeId, state: LinkState) -> Result<(), GnaError> {
        if !self.nodes.contains_key(&dst) {
            return Err(GnaError::UnknownNode(dst));
        }
        let ls = self.links.get_mut(&src).ok_or(GnaError::UnknownNode(src))?;
        let l = Link::new(dst, state);
        let pos = ls.partition_point(|x| *x <= l);
        ls.insert(pos, l);
        Ok(())
    }

    /// Removes a node, its internal links and any bridges touching it.
    pub fn remove_node(&mut self, id: NodeId) -> Option<NodeState> {
        let s = self.nodes.remove(&id)?;
        self.links.remove(&id);
        for ls in self.links.values_mut() {
            ls.retain(|l| l.dst != id);
        }
        self.bridges.retain(|b| b.inner != id);
        self.seeds.retain(|&x| x != id);
        Some(s)
    }

    pub fn set_seeds(&mut self, seeds: Vec<NodeId>) {
        self.seeds = seeds;
    }

    pub(crate) fn set_bridges(&mut self, mut bridges: Vec<Bridge>) {
        bridges.sort_unstable();
        self.bridges = bridges;
    }
}

/// One rewriting event `s_t => r_t`: the extracted sub-network, its
/// replacement and the partial node correspondence from old to new.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteEvent {
    pub old: SubGna,
    pub new: SubGna,
    pub correspondence: BTreeMap<NodeId, NodeId>,
}

impl RewriteEvent {
    /// `sub => sub` with the identity correspondence.
    pub fn identity(sub: &SubGna) -> Self {
        let mut new = sub.interior();
        new.bridges.clear();
        RewriteEvent { old: sub.clone(), new, correspondence: sub.node_ids().map(|v| (v, v)).collect() }
    }

    /// Event with the identity correspondence restricted to nodes present in
    /// both sub-networks.
    pub fn with_shared_identity(old: SubGna, new: SubGna) -> Self {
        let correspondence = old.node_ids().filter(|v| new.contains(*v)).map(|v| (v, v)).collect();
        RewriteEvent { old, new, correspondence }
    }

    /// True when the event changes nothing (same nodes, states and links
    /// under the identity correspondence).
    pub fn is_identity(&self) -> bool {
        self.old.nodes == self.new.nodes
            && self.old.links == self.new.links
            && self.correspondence.len() == self.old.node_count()
            && self.correspondence.iter().all(|(a, b)| a == b)
    }

    /// Empty-to-empty event (nothing extracted, nothing produced).
    pub fn is_empty(&self) -> bool {
        self.old.is_empty() && self.new.is_empty()
    }

    /// Checks the correspondence: injective, domain within old nodes, range
    /// within new nodes.
    pub fn validate(&self) -> Result<(), GnaError> {
        let mut seen = BTreeSet::new();
        for (a, b) in &self.correspondence {
            if !self.old.contains(*a) {
                return Err(GnaError::InvalidEvent(format!("correspondence source {a} not in old sub-network")));
            }
            if !self.new.contains(*b) {
                return Err(GnaError::InvalidEvent(format!("correspondence target {b} not in new sub-network")));
            }
            if !seen.insert(*b) {
                return Err(GnaError::InvalidEvent(format!("correspondence not injective at {b}")));
            }
        }
        Ok(())
    }
}
