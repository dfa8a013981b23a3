use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::sub::{Bridge, BridgeDir, SubGna};
use super::GnaError;

/// Engine-assigned node identity. Ids are allocated monotonically and never
/// reused, so a node keeps its id across a whole trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Node state drawn from the model's alphabet `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct NodeState(pub u64);

/// Link state drawn from `S'`. Models with a trivial link alphabet use
/// [`LinkState::PRESENT`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct LinkState(pub u32);

impl LinkState {
    pub const PRESENT: LinkState = LinkState(0);
}

/// Outgoing link entry. In the reverse index, `dst` holds the link's source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    pub dst: NodeId,
    pub state: LinkState,
}

impl Link {
    pub fn new(dst: NodeId, state: LinkState) -> Self {
        Link { dst, state }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct NodeEntry {
    pub(crate) state: NodeState,
    /// Sorted multiset of outgoing links.
    pub(crate) out: Vec<Link>,
    /// Sorted multiset of incoming links, keyed by source.
    pub(crate) inc: Vec<Link>,
}

fn insert_sorted(v: &mut Vec<Link>, l: Link) {
    let pos = v.partition_point(|x| *x <= l);
    v.insert(pos, l);
}

fn remove_one(v: &mut Vec<Link>, l: Link) -> bool {
    match v.binary_search(&l) {
        Ok(pos) => {
            v.remove(pos);
            true
        }
        Err(_) => false,
    }
}

/// Configuration `<V_t, C_t, L_t>` of a generative network automaton at
/// time `t`.
///
/// Adjacency lists are kept sorted by `(destination, link state)`, which
/// makes the serialised form canonical. An incoming-link index is maintained
/// alongside, so degrees and in-neighbourhoods are cheap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GnaConfig {
    pub(crate) nodes: BTreeMap<NodeId, NodeEntry>,
    pub(crate) next_id: u64,
    pub(crate) time: u64,
    pub(crate) undirected: bool,
    pub(crate) alphabet: Option<BTreeSet<NodeState>>,
}

impl Default for GnaConfig {
    fn default() -> Self {
        GnaConfig::new()
    }
}

impl GnaConfig {
    /// Empty directed configuration at time 0, unrestricted alphabet.
    pub fn new() -> Self {
        GnaConfig { nodes: BTreeMap::new(), next_id: 0, time: 0, undirected: false, alphabet: None }
    }

    /// Empty configuration restricted to the given finite alphabet.
    pub fn with_alphabet<I: IntoIterator<Item = NodeState>>(states: I) -> Self {
        let mut c = GnaConfig::new();
        c.alphabet = Some(states.into_iter().collect());
        c
    }

    pub fn alphabet(&self) -> Option<&BTreeSet<NodeState>> {
        self.alphabet.as_ref()
    }

    pub fn set_alphabet(&mut self, alphabet: Option<BTreeSet<NodeState>>) -> Result<(), GnaError> {
        if let Some(a) = &alphabet {
            for (id, e) in &self.nodes {
                if !a.contains(&e.state) {
                    return Err(GnaError::StateNotInAlphabet { node: *id, state: e.state });
                }
            }
        }
        self.alphabet = alphabet;
        Ok(())
    }

    fn check_state(&self, node: NodeId, state: NodeState) -> Result<(), GnaError> {
        match &self.alphabet {
            Some(a) if !a.contains(&state) => Err(GnaError::StateNotInAlphabet { node, state }),
            _ => Ok(()),
        }
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn set_time(&mut self, t: u64) {
        self.time = t;
    }

    /// Smallest id that has never been allocated.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    /// Raises the id watermark (never lowers it).
    pub fn reserve_ids(&mut self, next_id: u64) {
        self.next_id = self.next_id.max(next_id);
    }

    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    /// Marks the configuration as an undirected model. Turning the flag on
    /// checks that every link has a mirrored partner with the same state.
    pub fn set_undirected(&mut self, undirected: bool) -> Result<(), GnaError> {
        if undirected {
            self.check_symmetric()?;
        }
        self.undirected = undirected;
        Ok(())
    }

    fn check_symmetric(&self) -> Result<(), GnaError> {
        for (id, e) in &self.nodes {
            // as multisets, out(v) must equal inc(v)
            if e.out != e.inc {
                return Err(GnaError::Asymmetric(*id));
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn link_count(&self) -> usize {
        self.nodes.values().map(|e| e.out.len()).sum()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    /// Node ids in ascending order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    /// The `i`-th smallest node id.
    pub fn nth_id(&self, i: usize) -> NodeId {
        *self.nodes.keys().nth(i).expect("index below node count")
    }

    /// `(id, state)` pairs in ascending id order.
    pub fn states(&self) -> impl Iterator<Item = (NodeId, NodeState)> + '_ {
        self.nodes.iter().map(|(id, e)| (*id, e.state))
    }

    /// All links as `(source, link)` in canonical order.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, Link)> + '_ {
        self.nodes.iter().flat_map(|(id, e)| e.out.iter().map(move |l| (*id, *l)))
    }

    /// `(id, state, degree)` triples in ascending id order.
    pub fn degrees(&self) -> impl Iterator<Item = (NodeId, NodeState, usize)> + '_ {
        self.nodes.iter().map(|(id, e)| (*id, e.state, e.out.len() + e.inc.len()))
    }

    pub fn state(&self, id: NodeId) -> Option<NodeState> {
        self.nodes.get(&id).map(|e| e.state)
    }

    pub fn out_links(&self, id: NodeId) -> &[Link] {
        self.nodes.get(&id).map_or(&[], |e| &e.out)
    }

    /// Incoming links of `id`; each entry's `dst` field is the link source.
    pub fn in_links(&self, id: NodeId) -> &[Link] {
        self.nodes.get(&id).map_or(&[], |e| &e.inc)
    }

    /// Total degree (in + out, counting link multiplicity).
    pub fn degree(&self, id: NodeId) -> usize {
        self.nodes.get(&id).map_or(0, |e| e.out.len() + e.inc.len())
    }

    /// Sorted, de-duplicated set of nodes adjacent to `id` in either direction.
    pub fn neighbors(&self, id: NodeId) -> Vec<NodeId> {
        let mut v: Vec<NodeId> =
            self.out_links(id).iter().chain(self.in_links(id)).map(|l| l.dst).filter(|&u| u != id).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Sorted, de-duplicated in-neighbours (sources of links into `id`).
    pub fn in_neighbors(&self, id: NodeId) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.in_links(id).iter().map(|l| l.dst).collect();
        v.dedup();
        v
    }

    /// Allocates a fresh id and adds an isolated node.
    pub fn add_node(&mut self, state: NodeState) -> Result<NodeId, GnaError> {
        let id = NodeId(self.next_id);
        self.insert_node(id, state)?;
        Ok(id)
    }

    /// Adds an isolated node with an explicit id. Ids below the watermark
    /// that are not present were used before and cannot be reused.
    pub fn insert_node(&mut self, id: NodeId, state: NodeState) -> Result<(), GnaError> {
        if self.nodes.contains_key(&id) {
            return Err(GnaError::DuplicateNode(id));
        }
        if id.0 < self.next_id {
            return Err(GnaError::ReusedId(id));
        }
        self.check_state(id, state)?;
        self.nodes.insert(id, NodeEntry { state, out: Vec::new(), inc: Vec::new() });
        self.next_id = self.next_id.max(id.0 + 1);
        Ok(())
    }

    pub fn set_state(&mut self, id: NodeId, state: NodeState) -> Result<(), GnaError> {
        self.check_state(id, state)?;
        let e = self.nodes.get_mut(&id).ok_or(GnaError::UnknownNode(id))?;
        e.state = state;
        Ok(())
    }

    /// Adds a directed link `src -> dst`. Parallel links are allowed.
    pub fn add_link(&mut self, src: NodeId, dst: NodeId, state: LinkState) -> Result<(), GnaError> {
        if !self.nodes.contains_key(&src) {
            return Err(GnaError::UnknownNode(src));
        }
        if !self.nodes.contains_key(&dst) {
            return Err(GnaError::UnknownNode(dst));
        }
        insert_sorted(&mut self.nodes.get_mut(&src).unwrap().out, Link::new(dst, state));
        insert_sorted(&mut self.nodes.get_mut(&dst).unwrap().inc, Link::new(src, state));
        Ok(())
    }

    /// Adds the symmetric pair `a -> b`, `b -> a`.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId, state: LinkState) -> Result<(), GnaError> {
        self.add_link(a, b, state)?;
        self.add_link(b, a, state)
    }

    /// Removes one copy of `src -> dst` with the given state.
    pub fn remove_link(&mut self, src: NodeId, dst: NodeId, state: LinkState) -> bool {
        let removed = match self.nodes.get_mut(&src) {
            Some(e) => remove_one(&mut e.out, Link::new(dst, state)),
            None => false,
        };
        if removed {
            let ok = remove_one(&mut self.nodes.get_mut(&dst).unwrap().inc, Link::new(src, state));
            debug_assert!(ok);
        }
        removed
    }

    /// Removes a node together with every incident link.
    pub fn remove_node(&mut self, id: NodeId) -> Option<NodeState> {
        let entry = self.nodes.remove(&id)?;
        for l in &entry.out {
            if l.dst != id {
                if let Some(e) = self.nodes.get_mut(&l.dst) {
                    e.inc.retain(|x| x.dst != id);
                }
            }
        }
        for l in &entry.inc {
            if l.dst != id {
                if let Some(e) = self.nodes.get_mut(&l.dst) {
                    e.out.retain(|x| x.dst != id);
                }
            }
        }
        Some(entry.state)
    }

    /// Checks the structural invariants: link endpoints exist, the reverse
    /// index agrees with the forward lists, lists are sorted, states respect
    /// the alphabet, ids are below the watermark and undirected
    /// configurations are symmetric.
    pub fn validate(&self) -> Result<(), GnaError> {
        let mut expected_inc: BTreeMap<NodeId, Vec<Link>> = BTreeMap::new();
        for (id, e) in &self.nodes {
            if id.0 >= self.next_id {
                return Err(GnaError::Invalid(format!("node {id} above id watermark {}", self.next_id)));
            }
            self.check_state(*id, e.state)?;
            if !e.out.windows(2).all(|w| w[0] <= w[1]) {
                return Err(GnaError::Invalid(format!("unsorted links at node {id}")));
            }
            for l in &e.out {
                if !self.nodes.contains_key(&l.dst) {
                    return Err(GnaError::DanglingLink { src: *id, dst: l.dst });
                }
                expected_inc.entry(l.dst).or_default().push(Link::new(*id, l.state));
            }
        }
        for (id, e) in &self.nodes {
            let mut exp = expected_inc.remove(id).unwrap_or_default();
            exp.sort_unstable();
            if exp != e.inc {
                return Err(GnaError::Invalid(format!("reverse index mismatch at node {id}")));
            }
        }
        if self.undirected {
            self.check_symmetric()?;
        }
        Ok(())
    }

    /// Sub-network induced by `nodes`, with its bridge links and the given
    /// seed nodes. Unknown ids yield an error.
    pub fn induced(&self, nodes: &BTreeSet<NodeId>, seeds: Vec<NodeId>) -> Result<SubGna, GnaError> {
        let mut sub = SubGna::empty(self.next_id);
        for &id in nodes {
            let e = self.nodes.get(&id).ok_or(GnaError::UnknownNode(id))?;
            sub.nodes.insert(id, e.state);
            sub.links.insert(id, Vec::new());
        }
        for &id in nodes {
            let e = &self.nodes[&id];
            for l in &e.out {
                if nodes.contains(&l.dst) {
                    sub.links.get_mut(&id).unwrap().push(*l);
                } else {
                    sub.bridges.push(Bridge { inner: id, outer: l.dst, dir: BridgeDir::Out, state: l.state });
                }
            }
            for l in &e.inc {
                if !nodes.contains(&l.dst) {
                    sub.bridges.push(Bridge { inner: id, outer: l.dst, dir: BridgeDir::In, state: l.state });
                }
            }
        }
        sub.bridges.sort_unstable();
        for s in &seeds {
            if !nodes.contains(s) {
                return Err(GnaError::Invalid(format!("seed {s} outside the induced node set")));
            }
        }
        sub.seeds = seeds;
        Ok(sub)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> (GnaConfig, [NodeId; 3]) {
        let mut c = GnaConfig::new();
        let a = c.add_node(NodeState(0)).unwrap();
        let b = c.add_node(NodeState(1)).unwrap();
        let d = c.add_node(NodeState(0)).unwrap();
        c.add_link(a, b, LinkState::PRESENT).unwrap();
        c.add_link(b, d, LinkState::PRESENT).unwrap();
        (c, [a, b, d])
    }

    #[test]
    fn ids_monotone_never_reused() {
        let (mut c, [a, _, d]) = path3();
        c.remove_node(d);
        assert_eq!(c.add_node(NodeState(0)).unwrap(), NodeId(3));
        assert_eq!(c.insert_node(d, NodeState(0)), Err(GnaError::ReusedId(d)));
        assert_eq!(c.insert_node(a, NodeState(0)), Err(GnaError::DuplicateNode(a)));
    }

    #[test]
    fn remove_node_drops_incident_links() {
        let (mut c, [a, b, d]) = path3();
        c.remove_node(b);
        assert!(c.out_links(a).is_empty());
        assert!(c.in_links(d).is_empty());
        assert_eq!(c.link_count(), 0);
        c.validate().unwrap();
    }

    #[test]
    fn degrees_and_neighbors() {
        let (c, [a, b, d]) = path3();
        assert_eq!(c.degree(b), 2);
        assert_eq!(c.neighbors(b), vec![a, d]);
        assert_eq!(c.in_neighbors(b), vec![a]);
    }

    #[test]
    fn undirected_symmetry_checked() {
        let (mut c, [a, b, _]) = path3();
        assert_eq!(c.set_undirected(true), Err(GnaError::Asymmetric(a)));
        let mut u = GnaConfig::new();
        let x = u.add_node(NodeState(0)).unwrap();
        let y = u.add_node(NodeState(0)).unwrap();
        u.add_edge(x, y, LinkState::PRESENT).unwrap();
        u.set_undirected(true).unwrap();
        u.validate().unwrap();
        let _ = b;
        c.remove_link(a, b, LinkState::PRESENT);
    }

    #[test]
    fn alphabet_enforced() {
        let mut c = GnaConfig::with_alphabet([NodeState(0), NodeState(1)]);
        let a = c.add_node(NodeState(1)).unwrap();
        assert!(matches!(c.add_node(NodeState(2)), Err(GnaError::StateNotInAlphabet { .. })));
        assert!(c.set_state(a, NodeState(5)).is_err());
    }

    #[test]
    fn induced_records_bridges() {
        let (c, [a, b, d]) = path3();
        let sub = c.induced(&[b].into_iter().collect(), vec![b]).unwrap();
        assert_eq!(sub.node_count(), 1);
        assert_eq!(
            sub.bridges(),
            &[
                Bridge { inner: b, outer: a, dir: BridgeDir::In, state: LinkState::PRESENT },
                Bridge { inner: b, outer: d, dir: BridgeDir::Out, state: LinkState::PRESENT },
            ]
        );
    }
}
