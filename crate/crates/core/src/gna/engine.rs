//! The extraction -> replacement -> embedding cycle.

use std::collections::{BTreeMap, BTreeSet};

use rand::RngCore;

use super::config::{GnaConfig, NodeEntry, NodeId};
use super::mechanism::{Extraction, Replacement, Selected};
use super::sub::{BridgeDir, RewriteEvent, SubGna};
use super::GnaError;

/// Runs `e` on `config`. `Ok(None)` signals quiescence.
pub fn extract(config: &GnaConfig, e: &dyn Extraction, rng: &mut dyn RngCore) -> Result<Option<SubGna>, GnaError> {
    if let Some(alphabet) = config.alphabet() {
        for s in e.required_states() {
            if !alphabet.contains(&s) {
                return Err(GnaError::Schema { family: e.info().name, state: s });
            }
        }
    }
    match e.select(config, rng)? {
        Selected::Quiescent => Ok(None),
        Selected::Sub(sub) => {
            let check = config.induced(&sub.node_set(), sub.seeds.clone())?;
            if check.nodes != sub.nodes || check.links != sub.links || check.bridges != sub.bridges {
                return Err(GnaError::Invalid(format!(
                    "extraction `{}` returned a sub-network that is not induced",
                    e.info().name
                )));
            }
            Ok(Some(sub))
        }
    }
}

/// Runs `r` on `sub`, applying the identity fallback when configured.
pub fn replace(sub: &SubGna, r: &dyn Replacement, rng: &mut dyn RngCore) -> Result<RewriteEvent, GnaError> {
    match r.rewrite(sub, rng)? {
        Some(ev) => {
            if ev.old != *sub {
                return Err(GnaError::InvalidEvent(format!(
                    "replacement `{}` altered the extracted sub-network",
                    r.info().name
                )));
            }
            ev.validate()?;
            Ok(ev)
        }
        None if r.identity_fallback() => Ok(RewriteEvent::identity(sub)),
        None => Err(GnaError::ReplacementMiss(r.info().name)),
    }
}

/// Checks that `event` can be embedded into `config`.
fn check_embeddable(config: &GnaConfig, event: &RewriteEvent) -> Result<(), GnaError> {
    event.validate()?;
    let old = &event.old;
    for (id, s) in &old.nodes {
        match config.state(*id) {
            None => return Err(GnaError::StaleEvent(format!("node {id} not in configuration"))),
            Some(cs) if cs != *s => {
                return Err(GnaError::StaleEvent(format!("node {id} has state {} not {}", cs.0, s.0)))
            }
            _ => {}
        }
    }
    let current = config.induced(&old.node_set(), Vec::new())?;
    if current.links != old.links {
        return Err(GnaError::StaleEvent("internal links differ from the configuration".into()));
    }
    if current.bridges != old.bridges {
        return Err(GnaError::StaleEvent("bridge links differ from the configuration".into()));
    }
    for (src, l) in event.new.links() {
        if !event.new.contains(l.dst) || !event.new.contains(src) {
            return Err(GnaError::InvalidEvent(format!("new link {src}->{} leaves the new sub-network", l.dst)));
        }
    }
    for (id, s) in &event.new.nodes {
        if old.contains(*id) {
            if event.correspondence.get(id) != Some(id) {
                return Err(GnaError::InvalidEvent(format!("new node {id} reuses the id of an old node")));
            }
        } else if id.0 < config.next_id() {
            return Err(GnaError::InvalidEvent(format!("new node {id} reuses an allocated id")));
        }
        if let Some(a) = config.alphabet() {
            if !a.contains(s) {
                return Err(GnaError::StateNotInAlphabet { node: *id, state: *s });
            }
        }
    }
    Ok(())
}

/// Embeds `event` into `config` in place and advances time by one.
///
/// Old nodes and every link touching them are removed; the new
/// sub-network is inserted; bridge links are re-attached through the
/// correspondence with their direction and state preserved. Bridges of old
/// nodes without a correspondent are dropped. On error `config` is left
/// untouched.
pub fn embed_in_place(config: &mut GnaConfig, event: &RewriteEvent) -> Result<(), GnaError> {
    check_embeddable(config, event)?;
    for id in event.old.node_ids() {
        config.remove_node(id);
    }
    for (id, s) in &event.new.nodes {
        config.nodes.insert(*id, NodeEntry { state: *s, out: Vec::new(), inc: Vec::new() });
    }
    for (src, l) in event.new.links() {
        config.add_link(src, l.dst, l.state)?;
    }
    for b in &event.old.bridges {
        if let Some(&c) = event.correspondence.get(&b.inner) {
            match b.dir {
                BridgeDir::Out => config.add_link(c, b.outer, b.state)?,
                BridgeDir::In => config.add_link(b.outer, c, b.state)?,
            }
        }
    }
    if let Some(max) = event.new.nodes.keys().next_back() {
        config.reserve_ids(max.0 + 1);
    }
    config.time += 1;
    Ok(())
}

/// Pure variant of [`embed_in_place`].
pub fn embed(config: &GnaConfig, event: &RewriteEvent) -> Result<GnaConfig, GnaError> {
    let mut next = config.clone();
    embed_in_place(&mut next, event)?;
    Ok(next)
}

/// One asynchronous rewriting step, in place. Returns the event, or `None`
/// when the extraction reports quiescence.
pub fn step_in_place(
    config: &mut GnaConfig,
    e: &dyn Extraction,
    r: &dyn Replacement,
    rng: &mut dyn RngCore,
) -> Result<Option<RewriteEvent>, GnaError> {
    let Some(sub) = extract(config, e, rng)? else {
        return Ok(None);
    };
    let event = replace(&sub, r, rng)?;
    embed_in_place(config, &event)?;
    Ok(Some(event))
}

/// `embed(config, replace(extract(config, e), r))`.
pub fn step(
    config: &GnaConfig,
    e: &dyn Extraction,
    r: &dyn Replacement,
    rng: &mut dyn RngCore,
) -> Result<Option<(GnaConfig, RewriteEvent)>, GnaError> {
    let mut next = config.clone();
    Ok(step_in_place(&mut next, e, r, rng)?.map(|ev| (next, ev)))
}

/// A run of the automaton: the initial configuration, one event per step and
/// the final configuration. Intermediate configurations are recovered by
/// replaying the events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub initial: GnaConfig,
    pub events: Vec<RewriteEvent>,
    pub final_config: GnaConfig,
    /// The run stopped early because extraction reported quiescence.
    pub quiescent: bool,
    /// Free-form provenance (model name, seed, ...), serialised verbatim.
    pub meta: BTreeMap<String, String>,
}

impl Trajectory {
    pub fn new(initial: GnaConfig) -> Self {
        Trajectory {
            final_config: initial.clone(),
            initial,
            events: Vec::new(),
            quiescent: false,
            meta: BTreeMap::new(),
        }
    }

    /// Number of configurations (steps + 1).
    pub fn len(&self) -> usize {
        self.events.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn steps(&self) -> usize {
        self.events.len()
    }

    /// Replays every event from the initial configuration, calling
    /// `f(t, before, event, after)`, and checks that the replay ends in the
    /// stored final configuration.
    pub fn replay<F>(&self, mut f: F) -> Result<(), GnaError>
    where
        F: FnMut(usize, &GnaConfig, &RewriteEvent, &GnaConfig) -> Result<(), GnaError>,
    {
        let mut cur = self.initial.clone();
        for (t, ev) in self.events.iter().enumerate() {
            let next = embed(&cur, ev)?;
            f(t, &cur, ev, &next)?;
            cur = next;
        }
        if cur != self.final_config {
            return Err(GnaError::StaleEvent("replay does not reproduce the final configuration".into()));
        }
        Ok(())
    }

    /// All configurations in order. Memory is linear in the trajectory
    /// length times network size; prefer [`Trajectory::replay`] for long runs.
    pub fn configs(&self) -> Result<Vec<GnaConfig>, GnaError> {
        let mut out = Vec::with_capacity(self.len());
        out.push(self.initial.clone());
        self.replay(|_, _, _, next| {
            out.push(next.clone());
            Ok(())
        })?;
        Ok(out)
    }

    /// Per-step node correspondence maps.
    pub fn correspondences(&self) -> impl Iterator<Item = &BTreeMap<NodeId, NodeId>> {
        self.events.iter().map(|e| &e.correspondence)
    }
}

/// Runs `steps` asynchronous rewriting steps from `initial`. Quiescence ends
/// the run early with `quiescent = true`.
pub fn run(
    initial: &GnaConfig,
    e: &dyn Extraction,
    r: &dyn Replacement,
    steps: usize,
    rng: &mut dyn RngCore,
) -> Result<Trajectory, GnaError> {
    let mut traj = Trajectory::new(initial.clone());
    let mut cur = initial.clone();
    for _ in 0..steps {
        match step_in_place(&mut cur, e, r, rng)? {
            Some(ev) => traj.events.push(ev),
            None => {
                traj.quiescent = true;
                break;
            }
        }
    }
    traj.final_config = cur;
    Ok(traj)
}

/// Nodes present in both configurations whose state or adjacency differs.
pub fn changed_nodes(a: &GnaConfig, b: &GnaConfig) -> BTreeSet<NodeId> {
    a.nodes
        .iter()
        .filter_map(|(id, ea)| match b.nodes.get(id) {
            Some(eb) if ea != eb => Some(*id),
            _ => None,
        })
        .collect()
}
