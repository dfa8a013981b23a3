use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{
    acceptance_probability, euclidean, init_population, logistic, logit, metrics, Firm, MergerError, MergerMetrics,
    MergerParams, INCIDENTAL_STRENGTH, LOCAL_SOURCE_PROB, REMOVAL_THRESHOLD,
};
use crate::graph::UGraph;
use crate::io::{LinkRecord, NodeRecord, Snapshot};
use crate::num::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Individual<F> {
    pub id: usize,
    pub firm: Firm,
    /// Position inside the firm, `1..=n`.
    pub index: usize,
    pub culture: Vec<F>,
}

/// Individuals and their directed ties. Ties are stored by the logit of
/// their strength, so repeated updates never saturate; every strength is at
/// least `REMOVAL_THRESHOLD`. There are no self-ties.
#[derive(Debug, Clone, PartialEq)]
pub struct MergerState<F> {
    pub individuals: Vec<Individual<F>>,
    /// `incoming[dst][src] = logit(strength)`.
    incoming: Vec<BTreeMap<usize, F>>,
    outgoing: Vec<BTreeSet<usize>>,
    pub iteration: usize,
}

impl<F: Scalar> MergerState<F> {
    pub fn new(individuals: Vec<Individual<F>>) -> Self {
        let n = individuals.len();
        MergerState {
            individuals,
            incoming: vec![BTreeMap::new(); n],
            outgoing: vec![BTreeSet::new(); n],
            iteration: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Strength of `src -> dst`. At finite precision a very strong tie may
    /// round to 1.
    pub fn strength(&self, src: usize, dst: usize) -> Option<F> {
        self.incoming[dst].get(&src).map(|&x| logistic(x))
    }

    pub fn tie_logit(&self, src: usize, dst: usize) -> Option<F> {
        self.incoming[dst].get(&src).copied()
    }

    /// Inserts or overwrites the tie `src -> dst` with strength `s` in `(0, 1)`.
    pub fn set_tie(&mut self, src: usize, dst: usize, s: F) {
        self.set_tie_logit(src, dst, logit(s));
    }

    pub fn set_tie_logit(&mut self, src: usize, dst: usize, x: F) {
        assert_ne!(src, dst, "self-ties are not allowed");
        self.incoming[dst].insert(src, x);
        self.outgoing[src].insert(dst);
    }

    /// Removes the tie and returns its strength.
    pub fn remove_tie(&mut self, src: usize, dst: usize) -> Option<F> {
        self.outgoing[src].remove(&dst);
        self.incoming[dst].remove(&src).map(logistic)
    }

    pub fn in_degree(&self, dst: usize) -> usize {
        self.incoming[dst].len()
    }

    pub fn out_degree(&self, src: usize) -> usize {
        self.outgoing[src].len()
    }

    /// All ties as `(src, dst, strength)` ordered by `(src, dst)`.
    pub fn ties(&self) -> impl Iterator<Item = (usize, usize, F)> + '_ {
        self.outgoing
            .iter()
            .enumerate()
            .flat_map(move |(s, ds)| ds.iter().map(move |&d| (s, d, logistic(self.incoming[d][&s]))))
    }

    pub fn tie_count(&self) -> usize {
        self.outgoing.iter().map(BTreeSet::len).sum()
    }

    /// Undirected view of all ties.
    pub fn undirected(&self) -> UGraph {
        UGraph::from_edges(self.len(), self.ties().map(|(s, d, _)| (s, d)))
    }

    /// Members of `v`'s weakly connected component, ascending, including `v`.
    pub fn component_of(&self, v: usize) -> Vec<usize> {
        let mut seen = BTreeSet::from([v]);
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &w in self.incoming[u].keys().chain(&self.outgoing[u]) {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Nodes are labelled by firm with `index` and `culture` attributes;
    /// links carry the strength as weight and its exact logit as label.
    pub fn to_snapshot(&self) -> Snapshot {
        let nodes = self
            .individuals
            .iter()
            .map(|ind| {
                let culture: Vec<String> = ind.culture.iter().map(|x| x.to_string()).collect();
                let attrs = BTreeMap::from([
                    ("index".to_string(), ind.index.to_string()),
                    ("culture".to_string(), culture.join(",")),
                ]);
                NodeRecord { id: ind.id as u64, label: ind.firm.name().into(), attrs }
            })
            .collect();
        let links = self
            .ties()
            .map(|(s, d, w)| LinkRecord {
                src: s as u64,
                dst: d as u64,
                label: self.incoming[d][&s].to_string(),
                weight: w.to_f64_lossy(),
            })
            .collect();
        let mut snap = Snapshot {
            directed: true,
            time: self.iteration as u64,
            next_id: self.len() as u64,
            alphabet: None,
            nodes,
            links,
        };
        snap.canonicalize();
        snap
    }

    /// Inverse of [`MergerState::to_snapshot`]. Node ids must be `0..len`.
    /// A link whose label is not a number takes its logit from the weight,
    /// which must then lie in `(0, 1)`.
    pub fn from_snapshot(snap: &Snapshot) -> Result<Self, MergerError> {
        let bad = |m: String| MergerError::Snapshot(m);
        let mut nodes: Vec<&NodeRecord> = snap.nodes.iter().collect();
        nodes.sort_by_key(|r| r.id);
        let mut individuals = Vec::with_capacity(nodes.len());
        let mut dim = None;
        for (i, r) in nodes.iter().enumerate() {
            if r.id != i as u64 {
                return Err(bad(format!("node ids must be 0..{}, found {}", nodes.len(), r.id)));
            }
            let firm = match r.label.as_str() {
                "A" => Firm::A,
                "B" => Firm::B,
                other => return Err(bad(format!("node {i}: unknown firm `{other}`"))),
            };
            let index = match r.attrs.get("index") {
                Some(s) => s.parse().map_err(|_| bad(format!("node {i}: bad index `{s}`")))?,
                None => 0,
            };
            let raw = r.attrs.get("culture").ok_or_else(|| bad(format!("node {i}: missing culture")))?;
            let culture = raw
                .split(',')
                .map(|t| t.parse::<f64>().map(F::lit).map_err(|_| bad(format!("node {i}: bad culture `{raw}`"))))
                .collect::<Result<Vec<F>, _>>()?;
            if *dim.get_or_insert(culture.len()) != culture.len() {
                return Err(bad(format!("node {i}: culture dimension {} differs", culture.len())));
            }
            individuals.push(Individual { id: i, firm, index, culture });
        }
        let mut state = MergerState::new(individuals);
        for l in &snap.links {
            let (s, d) = (l.src as usize, l.dst as usize);
            if s >= state.len() || d >= state.len() || s == d {
                return Err(bad(format!("link {s}->{d} is invalid")));
            }
            let x = match l.label.parse::<f64>() {
                Ok(x) if x.is_finite() => F::lit(x),
                _ if l.weight > 0.0 && l.weight < 1.0 => logit(F::lit(l.weight)),
                _ => return Err(bad(format!("link {s}->{d} strength {} is outside (0, 1)", l.weight))),
            };
            state.set_tie_logit(s, d, x);
        }
        state.iteration = snap.time as usize;
        Ok(state)
    }
}

/// One action of `focal`: pick a source, compare cultures, then adopt the
/// midpoint and strengthen the tie, or weaken it (removing it below the
/// threshold).
pub fn individual_action<F: Scalar, R: Rng + ?Sized>(
    state: &mut MergerState<F>,
    focal: usize,
    d_c: F,
    rng: &mut R,
) -> Result<(), MergerError> {
    let local = rng.random::<f64>() < LOCAL_SOURCE_PROB && !state.incoming[focal].is_empty();
    let source = if local {
        let ins = &state.incoming[focal];
        let total = ins.values().fold(F::zero(), |a, &x| a + logistic(x));
        let mut r = F::lit(rng.random::<f64>()) * total;
        let mut pick = *ins.keys().next_back().unwrap();
        for (&src, &x) in ins {
            let s = logistic(x);
            if r < s {
                pick = src;
                break;
            }
            r = r - s;
        }
        pick
    } else {
        let others: Vec<usize> = state.component_of(focal).into_iter().filter(|&v| v != focal).collect();
        if others.is_empty() {
            return Ok(());
        }
        let src = others[rng.random_range(0..others.len())];
        if state.strength(src, focal).is_none() {
            state.set_tie(src, focal, F::lit(INCIDENTAL_STRENGTH));
        }
        src
    };
    let d = euclidean(&state.individuals[focal].culture, &state.individuals[source].culture);
    let p = acceptance_probability(d, d_c)?;
    let accepted = rng.random::<f64>() < p.to_f64_lossy();
    let x = state.tie_logit(source, focal).expect("source tie exists");
    let next = if accepted { x + F::one() } else { x - F::one() };
    if accepted {
        let half = F::lit(0.5);
        let other = state.individuals[source].culture.clone();
        for (x, y) in state.individuals[focal].culture.iter_mut().zip(other) {
            *x = (*x + y) * half;
        }
    }
    if logistic(next) < F::lit(REMOVAL_THRESHOLD) {
        state.remove_tie(source, focal);
    } else {
        state.set_tie_logit(source, focal, next);
    }
    Ok(())
}

/// One iteration: every individual acts once, in ascending id order unless
/// `p.shuffle` is set.
pub fn iterate<F: Scalar, R: Rng + ?Sized>(
    state: &mut MergerState<F>,
    p: &MergerParams<F>,
    rng: &mut R,
) -> Result<(), MergerError> {
    let mut order: Vec<usize> = (0..state.len()).collect();
    if p.shuffle {
        order.shuffle(rng);
    }
    for focal in order {
        individual_action(state, focal, p.d_c, rng)?;
    }
    state.iteration += 1;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergerRun<F> {
    /// Metrics at initialisation followed by the recorded iterations.
    pub series: Vec<MergerMetrics<F>>,
    pub state: MergerState<F>,
}

impl<F: Scalar> MergerRun<F> {
    pub fn last(&self) -> &MergerMetrics<F> {
        self.series.last().expect("series holds the initial metrics")
    }
}

/// Initialises and runs `p.iterations` iterations, recording metrics after
/// every one.
pub fn run<F: Scalar, R: Rng + ?Sized>(p: &MergerParams<F>, rng: &mut R) -> Result<MergerRun<F>, MergerError> {
    run_recording(p, rng, 1)
}

/// As [`run`] but records only the initial and final metrics.
pub fn run_final<F: Scalar, R: Rng + ?Sized>(p: &MergerParams<F>, rng: &mut R) -> Result<MergerRun<F>, MergerError> {
    run_recording(p, rng, usize::MAX)
}

/// Records metrics at iteration 0, every `every` iterations, and at the end.
pub fn run_recording<F: Scalar, R: Rng + ?Sized>(
    p: &MergerParams<F>,
    rng: &mut R,
    every: usize,
) -> Result<MergerRun<F>, MergerError> {
    let every = every.max(1);
    let mut state = init_population(p, rng)?;
    let mut series = vec![metrics(&state)];
    for it in 1..=p.iterations {
        iterate(&mut state, p, rng)?;
        if it % every == 0 || it == p.iterations {
            series.push(metrics(&state));
        }
    }
    Ok(MergerRun { series, state })
}
