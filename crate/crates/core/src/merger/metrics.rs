use serde::Serialize;

use super::{euclidean, Firm, MergerState};
use crate::graph::{edge_betweenness, largest_component, weakly_connected_components, UGraph};
use crate::num::Scalar;

/// Outcome measures on the largest weakly connected component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MergerMetrics<F> {
    pub iteration: usize,
    /// Mean distance over cross-firm pairs inside the component; NaN when
    /// the component holds only one firm.
    pub cross_firm_distance: F,
    /// Individuals outside the component.
    pub turnover: usize,
    /// Sum over ties of distance times strength.
    pub conflict: F,
    /// Sum over undirected edges of distance times edge betweenness.
    pub ineffectiveness: F,
}

pub const CSV_HEADER: &str = "condition,seed,iteration,cross_firm_distance,turnover,conflict,ineffectiveness";

impl<F: Scalar> MergerMetrics<F> {
    pub fn csv_row(&self, condition: &str, seed: u64) -> String {
        format!(
            "{condition},{seed},{},{},{},{},{}",
            self.iteration, self.cross_firm_distance, self.turnover, self.conflict, self.ineffectiveness
        )
    }
}

/// Stable CSV-safe name of a `(w, b)` condition.
pub fn condition_label<F: Scalar>(w: F, b: F) -> String {
    format!("w{w}_b{b}")
}

pub fn metrics<F: Scalar>(state: &MergerState<F>) -> MergerMetrics<F> {
    let total = state.len();
    let comps = weakly_connected_components(total, state.ties().map(|(s, d, _)| (s, d)));
    let lcc: Vec<usize> = largest_component(&comps).map(|i| comps[i].clone()).unwrap_or_default();
    let mut local = vec![usize::MAX; total];
    for (k, &v) in lcc.iter().enumerate() {
        local[v] = k;
    }
    let ind = &state.individuals;
    let dist = |a: usize, b: usize| euclidean(&ind[a].culture, &ind[b].culture);

    let (a_side, b_side): (Vec<usize>, Vec<usize>) = lcc.iter().partition(|&&v| ind[v].firm == Firm::A);
    let mut cross = F::zero();
    for &a in &a_side {
        for &b in &b_side {
            cross = cross + dist(a, b);
        }
    }
    let pairs = a_side.len() * b_side.len();
    let cross_firm_distance = if pairs == 0 { F::nan() } else { cross / F::from_count(pairs) };

    let mut conflict = F::zero();
    for (s, d, w) in state.ties().filter(|&(s, _, _)| local[s] != usize::MAX) {
        conflict = conflict + dist(s, d) * w;
    }

    let g = UGraph::from_edges(
        lcc.len(),
        state.ties().filter(|&(s, _, _)| local[s] != usize::MAX).map(|(s, d, _)| (local[s], local[d])),
    );
    let ineffectiveness =
        edge_betweenness::<F>(&g).into_iter().fold(F::zero(), |acc, ((a, b), eb)| acc + dist(lcc[a], lcc[b]) * eb);

    MergerMetrics {
        iteration: state.iteration,
        cross_firm_distance,
        turnover: total - lcc.len(),
        conflict,
        ineffectiveness,
    }
}
