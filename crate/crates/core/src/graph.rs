//! Shared graph algorithms on a compact undirected view.
//!
//! All simulators project their networks onto [`UGraph`] (dense `0..n`
//! indices, simple edges) before computing components, distances and
//! centralities.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::num::Scalar;
use crate::optimize::golden_section_max;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph is empty")]
    Empty,
    #[error("node index {0} out of range")]
    NodeOutOfRange(usize),
    #[error("power-law fit needs at least one value >= x_min = {0}")]
    NoTail(usize),
    #[error("x_min must be at least 1")]
    BadXmin,
}

/// Simple undirected graph over `0..n`. Self-loops and parallel edges are
/// dropped on insertion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UGraph {
    adj: Vec<Vec<usize>>,
}

impl UGraph {
    pub fn new(n: usize) -> Self {
        UGraph { adj: vec![Vec::new(); n] }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = UGraph::new(n);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    /// Adds `a -- b`; returns false when the edge was a loop or already present.
    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        assert!(a < self.adj.len() && b < self.adj.len(), "edge ({a},{b}) out of range");
        if a == b {
            return false;
        }
        match self.adj[a].binary_search(&b) {
            Ok(_) => false,
            Err(pos) => {
                self.adj[a].insert(pos, b);
                let pos_b = self.adj[b].binary_search(&a).unwrap_err();
                self.adj[b].insert(pos_b, a);
                true
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbour list.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Edges as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (a, ns) in self.adj.iter().enumerate() {
            for &b in ns {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Subgraph induced by `keep` (indices are renumbered in the given order).
    pub fn induced(&self, keep: &[usize]) -> UGraph {
        let mut pos = vec![usize::MAX; self.adj.len()];
        for (i, &v) in keep.iter().enumerate() {
            pos[v] = i;
        }
        let mut g = UGraph::new(keep.len());
        for (i, &v) in keep.iter().enumerate() {
            for &u in &self.adj[v] {
                if pos[u] != usize::MAX && i < pos[u] {
                    g.add_edge(i, pos[u]);
                }
            }
        }
        g
    }
}

/// BFS hop distances from `source`; `None` for unreachable nodes.
pub fn bfs_distances(g: &UGraph, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].unwrap();
        for &u in g.neighbors(v) {
            if dist[u].is_none() {
                dist[u] = Some(dv + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Connected components, each sorted ascending, ordered by smallest member.
pub fn connected_components(g: &UGraph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for &u in g.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Weakly connected components of a directed edge list over `0..n`.
pub fn weakly_connected_components<I>(n: usize, arcs: I) -> Vec<Vec<usize>>
where
    I: IntoIterator<Item = (usize, usize)>,
{
    connected_components(&UGraph::from_edges(n, arcs))
}

/// Index of the largest component; ties go to the component listed first
/// (the one with the smallest member).
pub fn largest_component(comps: &[Vec<usize>]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in comps.iter().enumerate() {
        match best {
            Some(b) if comps[b].len() >= c.len() => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Closeness centrality with the Wasserman–Faust correction for
/// disconnected graphs: `((r-1)/(n-1)) * ((r-1)/sum_d)` where `r` is the size
/// of the node's component. Isolated nodes score 0.
pub fn closeness_centrality<F: Scalar>(g: &UGraph) -> Result<Vec<F>, GraphError> {
    let n = g.node_count();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let mut out = Vec::with_capacity(n);
    for v in 0..n {
        let dist = bfs_distances(g, v);
        let (mut reach, mut total) = (0usize, 0usize);
        for d in dist.iter().flatten() {
            if *d > 0 {
                reach += 1;
                total += d;
            }
        }
        if reach == 0 || n == 1 {
            out.push(F::zero());
            continue;
        }
        let r = F::from_count(reach);
        let c = (r / F::from_count(n - 1)) * (r / F::from_count(total));
        out.push(c);
    }
    Ok(out)
}

/// Harmonic closeness `sum_{u != v} 1/d(v,u) / (n-1)`; unreachable pairs
/// contribute 0, so the measure is defined on disconnected graphs.
pub fn harmonic_closeness<F: Scalar>(g: &UGraph) -> Result<Vec<F>, GraphError> {
    let n = g.node_count();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if n == 1 {
        return Ok(vec![F::zero()]);
    }
    let norm = F::from_count(n - 1);
    Ok((0..n)
        .map(|v| {
            let s = bfs_distances(g, v)
                .into_iter()
                .flatten()
                .filter(|&d| d > 0)
                .fold(F::zero(), |acc, d| acc + F::one() / F::from_count(d));
            s / norm
        })
        .collect())
}

/// Edge betweenness: for every edge, the number of shortest paths through it
/// summed over unordered node pairs, each pair's paths weighted by
/// `1/sigma_st`. Brandes dependency accumulation, `O(VE)`.
pub fn edge_betweenness<F: Scalar>(g: &UGraph) -> BTreeMap<(usize, usize), F> {
    let n = g.node_count();
    let mut score: BTreeMap<(usize, usize), F> = g.edges().into_iter().map(|e| (e, F::zero())).collect();
    let mut sigma = vec![F::zero(); n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![F::zero(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for s in 0..n {
        sigma.iter_mut().for_each(|x| *x = F::zero());
        dist.iter_mut().for_each(|x| *x = usize::MAX);
        delta.iter_mut().for_each(|x| *x = F::zero());
        order.clear();
        sigma[s] = F::one();
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] = sigma[w] + sigma[v];
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in g.neighbors(w) {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    let c = sigma[v] / sigma[w] * (F::one() + delta[w]);
                    let key = if v < w { (v, w) } else { (w, v) };
                    let e = score.get_mut(&key).unwrap();
                    *e = *e + c;
                    delta[v] = delta[v] + c;
                }
            }
        }
    }
    // every unordered pair was counted from both endpoints
    let half = F::lit(0.5);
    for v in score.values_mut() {
        *v = *v * half;
    }
    score
}

/// Histogram degree -> node count.
pub fn degree_histogram(degrees: &[usize]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &d in degrees {
        *h.entry(d).or_insert(0) += 1;
    }
    h
}

/// Hurwitz zeta `sum_{k>=0} (q+k)^{-s}` for `s > 1`, `q > 0`, by
/// Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const N: usize = 12;
    // B_2j / (2j)!
    const B: [f64; 6] =
        [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0, 1.0 / 47900160.0, -691.0 / 1307674368000.0];
    let mut sum = 0.0;
    for k in 0..N {
        sum += (q + k as f64).powf(-s);
    }
    let a = q + N as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // rising factorial s(s+1)...(s+2j-2) times a^{-s-2j+1}
    let mut fact = s;
    let mut pow = a.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        sum += b * fact * pow;
        let m = 2.0 * j as f64;
        fact *= (s + m + 1.0) * (s + m + 2.0);
        pow /= a * a;
    }
    sum
}

/// Maximum-likelihood exponent of a discrete power law `p(x) ~ x^-gamma`
/// fitted to the values `>= x_min`.
pub fn powerlaw_exponent_mle<F: Scalar>(values: &[usize], x_min: usize) -> Result<F, GraphError> {
    if x_min == 0 {
        return Err(GraphError::BadXmin);
    }
    let tail: Vec<f64> = values.iter().filter(|&&x| x >= x_min).map(|&x| x as f64).collect();
    if tail.is_empty() {
        return Err(GraphError::NoTail(x_min));
    }
    let n = tail.len() as f64;
    let sum_ln: f64 = tail.iter().map(|x| x.ln()).sum();
    let q = x_min as f64;
    let m = golden_section_max(|g| -g * sum_ln - n * hurwitz_zeta(g, q).ln(), 1.0001, 12.0, 1e-9);
    Ok(F::lit(m.arg))
}

/// Power-law fit with `x_min` chosen by minimising the Kolmogorov–Smirnov
/// distance between the empirical tail and the fitted model. Candidate
/// `x_min` values are the distinct observed values leaving at least
/// `min_tail` points in the tail. Returns `(x_min, gamma, ks)`.
pub fn powerlaw_fit_ks(values: &[usize], min_tail: usize) -> Result<(usize, f64, f64), GraphError> {
    let mut sorted: Vec<usize> = values.iter().copied().filter(|&x| x > 0).collect();
    if sorted.is_empty() {
        return Err(GraphError::Empty);
    }
    sorted.sort_unstable();
    let mut candidates: Vec<usize> = sorted.clone();
    candidates.dedup();
    let mut best: Option<(usize, f64, f64)> = None;
    for &x_min in &candidates {
        let start = sorted.partition_point(|&x| x < x_min);
        let tail = &sorted[start..];
        if tail.len() < min_tail.max(1) {
            break;
        }
        let gamma: f64 = powerlaw_exponent_mle(tail, x_min)?;
        let z = hurwitz_zeta(gamma, x_min as f64);
        let n = tail.len() as f64;
        let mut ks: f64 = 0.0;
        let mut model_cdf = 0.0;
        let mut i = 0;
        let max = *tail.last().unwrap();
        for x in x_min..=max {
            let below = i as f64 / n;
            while i < tail.len() && tail[i] == x {
                i += 1;
            }
            let emp = i as f64 / n;
            let pmf = (x as f64).powf(-gamma) / z;
            ks = ks.max((below - model_cdf).abs());
            model_cdf += pmf;
            ks = ks.max((emp - model_cdf).abs());
        }
        if best.is_none_or(|(_, _, b)| ks < b) {
            best = Some((x_min, gamma, ks));
        }
    }
    best.ok_or(GraphError::NoTail(min_tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> UGraph {
        UGraph::from_edges(n, (1..n).map(|i| (i - 1, i)))
    }

    #[test]
    fn p3_edge_betweenness() {
        let eb: BTreeMap<_, f64> = edge_betweenness(&path(3));
        assert_eq!(eb[&(0, 1)], 2.0);
        assert_eq!(eb[&(1, 2)], 2.0);
    }

    #[test]
    fn complete_graph_closeness_equal() {
        let n = 6;
        let g = UGraph::from_edges(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))));
        let c: Vec<f64> = closeness_centrality(&g).unwrap();
        assert!(c.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        let h: Vec<f32> = harmonic_closeness(&g).unwrap();
        assert!(h.iter().all(|&x| (x - 1.0).abs() < 1e-6));
    }

    #[test]
    fn star_center_maximal() {
        let g = UGraph::from_edges(5, (1..5).map(|i| (0, i)));
        let c: Vec<f64> = closeness_centrality(&g).unwrap();
        assert!(c[1..].iter().all(|&x| x < c[0]));
        assert_eq!(c[0], 1.0);
    }

    #[test]
    fn empty_graph_errors() {
        assert_eq!(closeness_centrality::<f64>(&UGraph::new(0)), Err(GraphError::Empty));
        assert_eq!(harmonic_closeness::<f64>(&UGraph::new(0)), Err(GraphError::Empty));
    }

    #[test]
    fn components_and_largest() {
        let g = UGraph::from_edges(6, [(0, 1), (2, 3), (3, 4)]);
        let c = connected_components(&g);
        assert_eq!(c, vec![vec![0, 1], vec![2, 3, 4], vec![5]]);
        assert_eq!(largest_component(&c), Some(1));
        let tie = connected_components(&UGraph::from_edges(4, [(0, 1), (2, 3)]));
        assert_eq!(largest_component(&tie), Some(0));
        let wc = weakly_connected_components(3, [(2, 0)]);
        assert_eq!(wc, vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn zeta_matches_riemann() {
        // zeta(2) = pi^2/6, zeta(3) = Apery's constant
        assert!((hurwitz_zeta(2.0, 1.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);
        assert!((hurwitz_zeta(3.0, 1.0) - 1.202_056_903_159_594_2).abs() < 1e-12);
        // shift identity zeta(s, q) = q^-s + zeta(s, q+1)
        let lhs = hurwitz_zeta(2.7, 3.0);
        let rhs = 3f64.powf(-2.7) + hurwitz_zeta(2.7, 4.0);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn powerlaw_recovers_exponent() {
        // deterministic sample: expected counts of a pure power law with gamma 2.5
        let z = hurwitz_zeta(2.5, 1.0);
        let mut values = Vec::new();
        for x in 1..3000usize {
            let c = (200_000.0 * (x as f64).powf(-2.5) / z).round() as usize;
            values.extend(std::iter::repeat_n(x, c));
        }
        let g: f64 = powerlaw_exponent_mle(&values, 1).unwrap();
        assert!((g - 2.5).abs() < 0.02, "{g}");
        assert!(powerlaw_exponent_mle::<f64>(&values, 0).is_err());
        assert!(powerlaw_exponent_mle::<f64>(&[1, 2], 5).is_err());
    }

    #[test]
    fn degree_histogram_counts() {
        let h = degree_histogram(&[1, 1, 2, 5]);
        assert_eq!(h.into_iter().collect::<Vec<_>>(), vec![(1, 2), (2, 1), (5, 1)]);
    }
}
