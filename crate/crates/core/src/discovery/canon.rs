//! Canonical keys of state-labelled sub-networks.
//!
//! Node labels are `(state, is_seed)`; links carry their state; bridges are
//! ignored. Up to [`EXACT_LIMIT`] nodes the key is exact: colour refinement
//! followed by an exhaustive search over orderings that respect the colour
//! classes, keeping the lexicographically smallest encoding. Larger
//! sub-networks get a Weisfeiler–Lehman hash key.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::gna::{LinkState, NodeId, NodeState, SubGna};

/// Largest sub-network canonicalised exactly.
pub const EXACT_LIMIT: usize = 8;

/// A canonical key together with the node order that realises it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub key: String,
    /// `order[i]` is the node at canonical position `i`.
    pub order: Vec<NodeId>,
}

/// Isomorphism class of a sub-network and how often it was seen.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CanonicalSubgraph {
    pub key: String,
    pub nodes: usize,
    pub count: usize,
}

/// Dense view of a sub-network: labels and a link list over `0..n`.
struct Dense {
    labels: Vec<(NodeState, bool)>,
    /// `(src, dst, state)`, sorted.
    links: Vec<(usize, usize, LinkState)>,
    ids: Vec<NodeId>,
}

impl Dense {
    fn new(sub: &SubGna) -> Self {
        let ids: Vec<NodeId> = sub.node_ids().collect();
        let seeds: BTreeSet<NodeId> = sub.seeds().iter().copied().collect();
        let labels = sub.states().map(|(v, s)| (s, seeds.contains(&v))).collect();
        let pos = |v: NodeId| ids.binary_search(&v).unwrap();
        let mut links: Vec<(usize, usize, LinkState)> =
            sub.links().map(|(s, l)| (pos(s), pos(l.dst), l.state)).collect();
        links.sort_unstable();
        Dense { labels, links, ids }
    }

    fn n(&self) -> usize {
        self.labels.len()
    }
}

/// Replaces each value by its rank among the distinct values.
fn ranks<T: Ord + Clone>(values: &[T]) -> Vec<usize> {
    let mut sorted: Vec<T> = values.to_vec();
    sorted.sort();
    sorted.dedup();
    values.iter().map(|v| sorted.binary_search(v).unwrap()).collect()
}

/// Own colour, then coloured out- and in-neighbours with link states.
type Signature = (usize, Vec<(usize, u32)>, Vec<(usize, u32)>);
/// `(src, dst, link state)` under a relabelling.
type Arc = (usize, usize, u32);

/// Stable colour refinement; colours are ranks of invariant signatures, so
/// they are themselves isomorphism invariant.
fn refine(d: &Dense) -> Vec<usize> {
    let n = d.n();
    let mut colour = ranks(&d.labels);
    loop {
        let mut sig: Vec<Signature> = colour.iter().map(|&c| (c, Vec::new(), Vec::new())).collect();
        for &(s, t, ls) in &d.links {
            sig[s].1.push((colour[t], ls.0));
            sig[t].2.push((colour[s], ls.0));
        }
        for x in &mut sig {
            x.1.sort_unstable();
            x.2.sort_unstable();
        }
        let next = ranks(&sig);
        let before = colour.iter().max().map_or(0, |m| m + 1);
        let after = next.iter().max().map_or(0, |m| m + 1);
        colour = next;
        if after == before || after == n {
            return colour;
        }
    }
}

/// Link list under `perm` (`perm[old] = new`), sorted.
fn encode(d: &Dense, perm: &[usize]) -> Vec<(usize, usize, u32)> {
    let mut e: Vec<(usize, usize, u32)> = d.links.iter().map(|&(s, t, ls)| (perm[s], perm[t], ls.0)).collect();
    e.sort_unstable();
    e
}

/// Visits every ordering of each colour class in turn (odometer over the
/// class permutations).
fn best_order(d: &Dense, colour: &[usize]) -> (Vec<usize>, Vec<(usize, usize, u32)>) {
    let k = colour.iter().max().map_or(0, |m| m + 1);
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (v, &c) in colour.iter().enumerate() {
        classes[c].push(v);
    }
    let mut offsets = Vec::with_capacity(k);
    let mut acc = 0;
    for c in &classes {
        offsets.push(acc);
        acc += c.len();
    }
    let mut perm = vec![0usize; d.n()];
    let mut best: Option<(Vec<usize>, Vec<Arc>)> = None;
    let mut current: Vec<Vec<usize>> = classes.clone();
    loop {
        for (c, members) in current.iter().enumerate() {
            for (i, &v) in members.iter().enumerate() {
                perm[v] = offsets[c] + i;
            }
        }
        let e = encode(d, &perm);
        if best.as_ref().is_none_or(|(_, b)| e < *b) {
            best = Some((perm.clone(), e));
        }
        // advance the first class that still has a next permutation
        let mut advanced = false;
        for (c, members) in current.iter_mut().enumerate() {
            if next_permutation(members) {
                advanced = true;
                break;
            }
            *members = classes[c].clone();
        }
        if !advanced {
            break;
        }
    }
    best.unwrap()
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn write_labels(out: &mut String, labels: &[(NodeState, bool)]) {
    for (i, (s, seed)) in labels.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{}{}", s.0, if *seed { "*" } else { "" }).unwrap();
    }
}

fn exact(d: &Dense) -> CanonicalForm {
    let colour = refine(d);
    let (perm, enc) = best_order(d, &colour);
    let mut order = vec![NodeId(0); d.n()];
    let mut labels = vec![(NodeState(0), false); d.n()];
    for (v, &p) in perm.iter().enumerate() {
        order[p] = d.ids[v];
        labels[p] = d.labels[v];
    }
    let mut key = format!("E{}:", d.n());
    write_labels(&mut key, &labels);
    key.push('|');
    for (i, (s, t, ls)) in enc.iter().enumerate() {
        if i > 0 {
            key.push(',');
        }
        write!(key, "{s}>{t}").unwrap();
        if *ls != 0 {
            write!(key, "#{ls}").unwrap();
        }
    }
    CanonicalForm { key, order }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv(mut h: u64, words: &[u64]) -> u64 {
    for w in words {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

fn hashed(d: &Dense) -> CanonicalForm {
    let n = d.n();
    let mut h: Vec<u64> = d.labels.iter().map(|(s, seed)| fnv(FNV_OFFSET, &[s.0, *seed as u64])).collect();
    for _ in 0..n.min(16) {
        let mut outs: Vec<Vec<(u64, u32)>> = vec![Vec::new(); n];
        let mut ins: Vec<Vec<(u64, u32)>> = vec![Vec::new(); n];
        for &(s, t, ls) in &d.links {
            outs[s].push((h[t], ls.0));
            ins[t].push((h[s], ls.0));
        }
        let mut next = Vec::with_capacity(n);
        for v in 0..n {
            outs[v].sort_unstable();
            ins[v].sort_unstable();
            let mut words = vec![h[v], 0x006f_7574];
            words.extend(outs[v].iter().flat_map(|&(x, l)| [x, l as u64]));
            words.push(0x696e);
            words.extend(ins[v].iter().flat_map(|&(x, l)| [x, l as u64]));
            next.push(fnv(FNV_OFFSET, &words));
        }
        let stable = ranks(&next).iter().max() == ranks(&h).iter().max();
        h = next;
        if stable {
            break;
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&v| (h[v], d.ids[v]));
    let mut sorted = h.clone();
    sorted.sort_unstable();
    let digest = fnv(FNV_OFFSET, &sorted);
    CanonicalForm {
        key: format!("W{}:{}:{:016x}", n, d.links.len(), digest),
        order: idx.into_iter().map(|v| d.ids[v]).collect(),
    }
}

/// Canonical key and node order of `sub`.
pub fn canonical_form(sub: &SubGna) -> CanonicalForm {
    let d = Dense::new(sub);
    if d.n() <= EXACT_LIMIT {
        exact(&d)
    } else {
        hashed(&d)
    }
}

pub fn canonical_key(sub: &SubGna) -> String {
    canonical_form(sub).key
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(states: &[u64], links: &[(u64, u64)], seeds: &[u64]) -> SubGna {
        let mut s = SubGna::empty(100);
        for (i, st) in states.iter().enumerate() {
            s.insert_node(NodeId(i as u64), NodeState(*st)).unwrap();
        }
        for &(a, b) in links {
            s.add_link(NodeId(a), NodeId(b), LinkState::PRESENT).unwrap();
        }
        s.set_seeds(seeds.iter().map(|&v| NodeId(v)).collect());
        s
    }

    #[test]
    fn empty_and_single() {
        assert_eq!(canonical_key(&SubGna::empty(0)), "E0:|");
        assert_eq!(canonical_key(&sub(&[3], &[], &[0])), "E1:3*|");
    }

    #[test]
    fn relabelled_paths_agree() {
        let a = sub(&[0, 1, 0], &[(0, 1), (1, 2)], &[1]);
        let b = sub(&[1, 0, 0], &[(1, 0), (0, 2)], &[0]);
        assert_eq!(canonical_key(&a), canonical_key(&b));
        let c = sub(&[0, 1, 0], &[(1, 0), (1, 2)], &[1]);
        assert_ne!(canonical_key(&a), canonical_key(&c));
    }

    #[test]
    fn seeds_and_link_states_matter() {
        let a = sub(&[0, 0], &[(0, 1)], &[0]);
        let b = sub(&[0, 0], &[(0, 1)], &[1]);
        assert_ne!(canonical_key(&a), canonical_key(&b));
        let mut c = sub(&[0, 0], &[], &[0]);
        c.add_link(NodeId(0), NodeId(1), LinkState(2)).unwrap();
        assert_ne!(canonical_key(&a), canonical_key(&c));
    }

    #[test]
    fn order_realises_key() {
        let a = sub(&[0, 0, 0, 0], &[(3, 0), (0, 1), (1, 2)], &[]);
        let f = canonical_form(&a);
        assert_eq!(f.order.len(), 4);
        // the path's source sits where the key says
        let pos = |v| f.order.iter().position(|&x| x == v).unwrap();
        assert!(f.key.contains(&format!("{}>{}", pos(NodeId(3)), pos(NodeId(0)))));
    }

    #[test]
    fn large_subs_are_hashed() {
        let states = vec![0; 12];
        let links: Vec<(u64, u64)> = (0..11).map(|i| (i, i + 1)).collect();
        let a = sub(&states, &links, &[0]);
        let rev: Vec<(u64, u64)> = (0..11).map(|i| (11 - i, 10 - i)).collect();
        let b = sub(&states, &rev, &[11]);
        let ka = canonical_key(&a);
        assert!(ka.starts_with("W12:11:"));
        assert_eq!(ka, canonical_key(&b));
        assert_ne!(ka, canonical_key(&sub(&states, &links, &[1])));
    }
}
