//! The operational-network state machine.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, RngCore};
use serde::Serialize;

use super::metrics::{network_entropy_of, OpMetrics, Sphere};
use super::predicate::Scope;
use super::{LinkType, OpNetError, Scenario, Value, TASKED};
use crate::io::{LinkRecord, NodeRecord, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    Armed,
    Active { started: u64, remaining: u32 },
    Done { started: u64, completed: u64 },
}

/// One variable copied on completion of an event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transfer {
    pub tick: u64,
    pub event: usize,
    pub from: usize,
    pub to: usize,
    pub var: String,
    pub value: Value,
}

/// Simulation state. The standby network lives in the [`Scenario`]; the
/// operational network grows here. Links are keyed by
/// `(source, destination, type)`; the weight counts completed interactions.
#[derive(Debug, Clone, PartialEq)]
pub struct OpState {
    pub clock: u64,
    pub knowledge: Vec<BTreeMap<String, Value>>,
    pub tasked: BTreeSet<usize>,
    pub links: BTreeMap<(usize, usize, LinkType), u64>,
    pub nodes: BTreeSet<usize>,
    pub phases: Vec<Phase>,
    pub transfers: Vec<Transfer>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TickSummary {
    pub activated: Vec<usize>,
    pub completed: Vec<usize>,
}

impl OpState {
    pub fn new(sc: &Scenario) -> Self {
        OpState {
            clock: 0,
            knowledge: sc.agents.iter().map(|a| a.knowledge.clone()).collect(),
            tasked: BTreeSet::new(),
            links: BTreeMap::new(),
            nodes: BTreeSet::new(),
            phases: vec![Phase::Armed; sc.events.len()],
            transfers: Vec::new(),
        }
    }

    fn lookup(&self, agent: usize, name: &str) -> Option<Value> {
        if name == TASKED {
            return Some(Value::Bool(self.tasked.contains(&agent)));
        }
        self.knowledge[agent].get(name).cloned()
    }

    /// All conditions hold and the source has every required variable.
    /// Ignores the event's phase.
    pub fn executable(&self, sc: &Scenario, ev: usize) -> bool {
        let e = &sc.events[ev];
        let lookup = |s: Scope, name: &str| match s {
            Scope::Src => self.lookup(e.source, name),
            Scope::Dst => self.lookup(e.destination, name),
        };
        e.required.iter().all(|v| self.knowledge[e.source].contains_key(v))
            && e.conditions.iter().all(|c| c.expr.eval(&lookup))
    }

    /// No event is active and no armed event is executable.
    pub fn is_quiescent(&self, sc: &Scenario) -> bool {
        self.phases.iter().enumerate().all(|(i, p)| match p {
            Phase::Active { .. } => false,
            Phase::Armed => !self.executable(sc, i),
            Phase::Done { .. } => true,
        })
    }

    /// One unit of time: activate every executable armed event, decrement
    /// the counters of all active events, and commit those reaching zero in
    /// event order.
    pub fn tick(&mut self, sc: &Scenario, rng: &mut dyn RngCore) -> TickSummary {
        let mut summary = TickSummary::default();
        let ready: Vec<usize> =
            (0..sc.events.len()).filter(|&i| self.phases[i] == Phase::Armed && self.executable(sc, i)).collect();
        for i in ready {
            let e = &sc.events[i];
            let duration = if e.variation == 0 {
                e.duration
            } else {
                let d = i64::from(e.duration);
                let v = i64::from(e.variation);
                rng.random_range(d - v..=d + v).max(1) as u32
            };
            self.phases[i] = Phase::Active { started: self.clock, remaining: duration };
            summary.activated.push(i);
        }
        let now = self.clock + 1;
        for i in 0..self.phases.len() {
            if let Phase::Active { started, remaining } = self.phases[i] {
                if remaining > 1 {
                    self.phases[i] = Phase::Active { started, remaining: remaining - 1 };
                } else {
                    self.commit(sc, i, now);
                    self.phases[i] = Phase::Done { started, completed: now };
                    summary.completed.push(i);
                }
            }
        }
        self.clock = now;
        summary
    }

    fn commit(&mut self, sc: &Scenario, i: usize, now: u64) {
        let e = &sc.events[i];
        *self.links.entry((e.source, e.destination, e.link_type)).or_insert(0) += 1;
        self.nodes.insert(e.source);
        self.nodes.insert(e.destination);
        let (from, to) = match e.link_type {
            LinkType::Request => (e.destination, e.source),
            LinkType::Flow => (e.source, e.destination),
            LinkType::Task => {
                self.tasked.insert(e.destination);
                return;
            }
        };
        for var in &e.transferred {
            if let Some(value) = self.knowledge[from].get(var).cloned() {
                self.knowledge[to].insert(var.clone(), value.clone());
                self.transfers.push(Transfer { tick: now, event: i, from, to, var: var.clone(), value });
            }
        }
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.links.values().sum()
    }

    pub fn metrics(&self, sc: &Scenario) -> OpMetrics {
        let weights: Vec<u64> = self.links.values().copied().collect();
        let (heterotypes, entropy) =
            network_entropy_of(self.nodes.iter().map(|&i| &sc.agents[i]), sc.heterotype_prefix);
        OpMetrics {
            tick: self.clock,
            nodes: self.nodes.len(),
            links: weights.len(),
            max_weight: weights.iter().copied().max().unwrap_or(0),
            min_weight: weights.iter().copied().min().unwrap_or(0),
            avg_weight: if weights.is_empty() { 0.0 } else { self.total_weight() as f64 / weights.len() as f64 },
            heterotypes,
            entropy,
        }
    }

    /// Undirected neighbours of `agent` in the operational network.
    fn neighbours(&self, agent: usize) -> BTreeSet<usize> {
        self.links
            .keys()
            .filter_map(|&(s, d, _)| match () {
                _ if s == agent => Some(d),
                _ if d == agent => Some(s),
                _ => None,
            })
            .collect()
    }

    /// Closed radius-1 neighbourhood of `agent` with the links among its
    /// members, reach ignoring direction.
    pub fn sphere_of_influence(&self, sc: &Scenario, agent: usize) -> Result<Sphere, OpNetError> {
        let name = || sc.agents.get(agent).map_or_else(|| agent.to_string(), |a| a.name.clone());
        if agent >= sc.agents.len() {
            return Err(OpNetError::UnknownAgent(name()));
        }
        if !self.nodes.contains(&agent) {
            return Err(OpNetError::NotInNetwork(name()));
        }
        let mut nodes = self.neighbours(agent);
        nodes.insert(agent);
        let links = self
            .links
            .iter()
            .filter(|((s, d, _), _)| nodes.contains(s) && nodes.contains(d))
            .map(|(&(s, d, t), &w)| (s, d, t, w))
            .collect();
        let fraction = nodes.len() as f64 / self.nodes.len() as f64;
        Ok(Sphere { center: agent, nodes, links, fraction })
    }

    /// Degree centrality over the undirected operational network:
    /// distinct neighbours divided by `n - 1`.
    pub fn degree_centrality(&self) -> Vec<(usize, f64)> {
        let n = self.nodes.len();
        self.nodes
            .iter()
            .map(|&v| (v, if n > 1 { self.neighbours(v).len() as f64 / (n - 1) as f64 } else { 0.0 }))
            .collect()
    }

    /// The operational network as a snapshot: node labels are agent classes,
    /// attributes carry the name, heterotype and tasked flag; link labels are
    /// link types and weights are interaction counts.
    pub fn snapshot(&self, sc: &Scenario) -> Snapshot {
        let nodes = self
            .nodes
            .iter()
            .map(|&i| {
                let a = &sc.agents[i];
                let mut attrs = BTreeMap::from([
                    ("name".to_string(), a.name.clone()),
                    ("heterotype".to_string(), a.heterotype(sc.heterotype_prefix)),
                ]);
                if self.tasked.contains(&i) {
                    attrs.insert("tasked".into(), "true".into());
                }
                NodeRecord { id: i as u64, label: a.class.name().into(), attrs }
            })
            .collect();
        let links = self
            .links
            .iter()
            .map(|(&(s, d, t), &w)| LinkRecord {
                src: s as u64,
                dst: d as u64,
                label: t.name().into(),
                weight: w as f64,
            })
            .collect();
        let mut snap = Snapshot {
            directed: true,
            time: self.clock,
            next_id: sc.agents.len() as u64,
            alphabet: None,
            nodes,
            links,
        };
        snap.canonicalize();
        snap
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub state: OpState,
    pub ticks: u64,
    /// The tick budget ran out before quiescence.
    pub truncated: bool,
    /// Metrics at tick 0 and after every tick.
    pub series: Vec<OpMetrics>,
}

/// Ticks until quiescence or `max_ticks`, calling `observe` on the initial
/// state and after every tick.
pub fn run_to_quiescence<F>(sc: &Scenario, rng: &mut dyn RngCore, max_ticks: u64, mut observe: F) -> RunOutcome
where
    F: FnMut(&OpState),
{
    let mut state = OpState::new(sc);
    let mut series = vec![state.metrics(sc)];
    observe(&state);
    let mut ticks = 0;
    while !state.is_quiescent(sc) && ticks < max_ticks {
        state.tick(sc, rng);
        ticks += 1;
        series.push(state.metrics(sc));
        observe(&state);
    }
    let truncated = !state.is_quiescent(sc);
    RunOutcome { state, ticks, truncated, series }
}

/// Replays the transfer log from the initial stores and checks that every
/// variable an agent holds was either initial or copied by a completed
/// Request or Flow listing it, in the direction its type prescribes, at its
/// completion tick.
pub fn audit_causality(sc: &Scenario, st: &OpState) -> Result<(), OpNetError> {
    let mut stores: Vec<BTreeMap<String, Value>> = sc.agents.iter().map(|a| a.knowledge.clone()).collect();
    for t in &st.transfers {
        let fail =
            |msg: String| Err(OpNetError::Causality(format!("transfer of `{}` at tick {}: {msg}", t.var, t.tick)));
        let Some(e) = sc.events.get(t.event) else {
            return fail(format!("unknown event {}", t.event));
        };
        match st.phases[t.event] {
            Phase::Done { completed, .. } if completed == t.tick => {}
            _ => return fail(format!("event {} did not complete at that tick", t.event)),
        }
        let (from, to) = match e.link_type {
            LinkType::Request => (e.destination, e.source),
            LinkType::Flow => (e.source, e.destination),
            LinkType::Task => return fail("task events carry no knowledge".into()),
        };
        if (from, to) != (t.from, t.to) {
            return fail("direction does not match the link type".into());
        }
        if !e.transferred.contains(&t.var) {
            return fail("variable is not in the event's transfer list".into());
        }
        if stores[from].get(&t.var) != Some(&t.value) {
            return fail("the giver did not hold that value".into());
        }
        stores[to].insert(t.var.clone(), t.value.clone());
    }
    for (i, (replayed, actual)) in stores.iter().zip(&st.knowledge).enumerate() {
        if replayed != actual {
            let extra: Vec<&String> = actual.keys().filter(|k| replayed.get(*k) != actual.get(*k)).collect();
            return Err(OpNetError::Causality(format!(
                "agent `{}` holds {extra:?} without a completing transfer",
                sc.agents[i].name
            )));
        }
    }
    Ok(())
}
