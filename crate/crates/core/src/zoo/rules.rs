//! Replacement rules used by the reference models.

use rand::{Rng, RngCore};

use crate::gna::{
    weighted_draws, GnaError, LinkState, MechanismInfo, Mode, NodeId, NodeState, Replacement, RewriteEvent, SubGna,
};

/// State given to a newly created node.
#[derive(Debug, Clone, PartialEq)]
pub enum NewcomerState {
    Fixed(NodeState),
    /// Categorical distribution `(state, probability)`.
    Random(Vec<(NodeState, f64)>),
}

impl NewcomerState {
    pub fn sample(&self, rng: &mut dyn RngCore) -> NodeState {
        match self {
            NewcomerState::Fixed(s) => *s,
            NewcomerState::Random(d) => {
                let w: Vec<f64> = d.iter().map(|(_, p)| *p).collect();
                d[weighted_draws(&w, 1, rng)[0]].0
            }
        }
    }

    fn is_random(&self) -> bool {
        matches!(self, NewcomerState::Random(_))
    }
}

/// Every old node just keeps its id.
fn identity_on(sub: &SubGna, new: SubGna) -> RewriteEvent {
    RewriteEvent::with_shared_identity(sub.clone(), new)
}

/// Adds one new node linked to every seed (`newcomer -> seed`). Optionally
/// each seed adopts the newcomer's state with probability `adopt_prob`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttachNewcomer {
    pub state: NewcomerState,
    pub adopt_prob: f64,
    pub link_state: LinkState,
}

impl AttachNewcomer {
    pub fn new(state: NewcomerState) -> Self {
        AttachNewcomer { state, adopt_prob: 0.0, link_state: LinkState::PRESENT }
    }
}

impl Replacement for AttachNewcomer {
    fn info(&self) -> MechanismInfo {
        let mode = if self.state.is_random() || self.adopt_prob > 0.0 { Mode::Stochastic } else { Mode::Deterministic };
        MechanismInfo::replacement("attach-newcomer", mode, vec![("adopt_prob".into(), self.adopt_prob)])
    }

    fn rewrite(&self, sub: &SubGna, rng: &mut dyn RngCore) -> Result<Option<RewriteEvent>, GnaError> {
        if sub.seeds().is_empty() {
            return Ok(None);
        }
        let mut new = sub.interior();
        let u = sub.fresh_id(0);
        let s = self.state.sample(rng);
        new.insert_node(u, s)?;
        for &seed in sub.seeds() {
            new.add_link(u, seed, self.link_state)?;
        }
        if self.adopt_prob > 0.0 {
            for &seed in sub.seeds() {
                if rng.random::<f64>() < self.adopt_prob {
                    new.set_state(seed, s)?;
                }
            }
        }
        let mut seeds = vec![u];
        seeds.extend_from_slice(sub.seeds());
        new.set_seeds(seeds);
        Ok(Some(identity_on(sub, new)))
    }
}

/// Sets the first seed's state to the strict majority state among its
/// in-neighbours inside the sub-network; ties and empty neighbourhoods keep
/// the current state.
#[derive(Debug, Clone, Copy, Default)]
pub struct MajorityRule;

pub fn majority(states: &[NodeState], current: NodeState) -> NodeState {
    let mut counts: Vec<(NodeState, usize)> = Vec::new();
    for s in states {
        match counts.iter_mut().find(|(x, _)| x == s) {
            Some((_, c)) => *c += 1,
            None => counts.push((*s, 1)),
        }
    }
    let Some(max) = counts.iter().map(|(_, c)| *c).max() else {
        return current;
    };
    let top: Vec<NodeState> = counts.iter().filter(|(_, c)| *c == max).map(|(s, _)| *s).collect();
    if top.len() == 1 {
        top[0]
    } else {
        current
    }
}

impl Replacement for MajorityRule {
    fn info(&self) -> MechanismInfo {
        MechanismInfo::replacement("majority", Mode::Deterministic, Vec::new())
    }

    fn rewrite(&self, sub: &SubGna, _rng: &mut dyn RngCore) -> Result<Option<RewriteEvent>, GnaError> {
        let Some(&center) = sub.seeds().first() else {
            return Ok(None);
        };
        let inputs: Vec<NodeState> = sub
            .in_links(center)
            .into_iter()
            .filter(|(s, _)| *s != center)
            .map(|(s, _)| sub.state(s).unwrap())
            .collect();
        let mut new = sub.interior();
        new.set_state(center, majority(&inputs, sub.state(center).unwrap()))?;
        Ok(Some(identity_on(sub, new)))
    }
}

/// Encodes a Boolean-network node state: bit 0 is the output, bits `1..`
/// hold the node's truth table (entry `i` at bit `i + 1`).
pub fn boolean_state(table: u64, output: bool) -> NodeState {
    NodeState((table << 1) | output as u64)
}

pub fn boolean_output(state: NodeState) -> bool {
    state.0 & 1 == 1
}

pub fn boolean_table(state: NodeState) -> u64 {
    state.0 >> 1
}

/// Updates the first seed's output bit from its own truth table. Inputs are
/// the in-links of the seed, ordered by link state (the input position).
#[derive(Debug, Clone, Copy, Default)]
pub struct BooleanRule;

impl Replacement for BooleanRule {
    fn info(&self) -> MechanismInfo {
        MechanismInfo::replacement("boolean-table", Mode::Deterministic, Vec::new())
    }

    fn rewrite(&self, sub: &SubGna, _rng: &mut dyn RngCore) -> Result<Option<RewriteEvent>, GnaError> {
        let Some(&node) = sub.seeds().first() else {
            return Ok(None);
        };
        let state = sub.state(node).unwrap();
        let mut inputs = sub.in_links(node);
        inputs.sort_by_key(|(_, ls)| *ls);
        let mut index = 0u64;
        for (src, pos) in inputs {
            if boolean_output(sub.state(src).unwrap()) {
                index |= 1 << pos.0;
            }
        }
        let out = (boolean_table(state) >> index) & 1 == 1;
        let mut new = sub.interior();
        new.set_state(node, boolean_state(boolean_table(state), out))?;
        Ok(Some(identity_on(sub, new)))
    }
}

/// Deletes the seeds; the remaining nodes keep their ids.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeleteSeeds;

impl Replacement for DeleteSeeds {
    fn info(&self) -> MechanismInfo {
        MechanismInfo::replacement("delete-seeds", Mode::Deterministic, Vec::new())
    }

    fn rewrite(&self, sub: &SubGna, _rng: &mut dyn RngCore) -> Result<Option<RewriteEvent>, GnaError> {
        if sub.seeds().is_empty() {
            return Ok(None);
        }
        let mut new = sub.interior();
        for &s in sub.seeds() {
            new.remove_node(s);
        }
        new.set_seeds(Vec::new());
        Ok(Some(identity_on(sub, new)))
    }
}

/// Birth-death dynamics on a single seed: delete it with probability
/// `delete_prob`, otherwise attach a newcomer to it.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathRule {
    pub delete_prob: f64,
    pub newcomer: AttachNewcomer,
}

impl Replacement for BirthDeathRule {
    fn info(&self) -> MechanismInfo {
        MechanismInfo::replacement("birth-death", Mode::Stochastic, vec![("delete_prob".into(), self.delete_prob)])
    }

    fn rewrite(&self, sub: &SubGna, rng: &mut dyn RngCore) -> Result<Option<RewriteEvent>, GnaError> {
        if sub.seeds().is_empty() {
            // empty network: restart with an isolated node
            let mut new = SubGna::empty(sub.id_base());
            let u = sub.fresh_id(0);
            new.insert_node(u, self.newcomer.state.sample(rng))?;
            new.set_seeds(vec![u]);
            return Ok(Some(identity_on(sub, new)));
        }
        if rng.random::<f64>() < self.delete_prob {
            DeleteSeeds.rewrite(sub, rng)
        } else {
            self.newcomer.rewrite(sub, rng)
        }
    }
}

/// State-based growth: an empty selection creates an isolated node with a
/// random state; a two-seed selection adds the link `seeds[0] -> seeds[1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBasedRule {
    pub newcomer: NewcomerState,
}

impl Replacement for StateBasedRule {
    fn info(&self) -> MechanismInfo {
        MechanismInfo::replacement("state-based", Mode::Stochastic, Vec::new())
    }

    fn rewrite(&self, sub: &SubGna, rng: &mut dyn RngCore) -> Result<Option<RewriteEvent>, GnaError> {
        match sub.seeds() {
            [] => {
                let mut new = sub.interior();
                let u: NodeId = sub.fresh_id(0);
                new.insert_node(u, self.newcomer.sample(rng))?;
                new.set_seeds(vec![u]);
                Ok(Some(identity_on(sub, new)))
            }
            [a, b] => {
                let mut new = sub.interior();
                new.add_link(*a, *b, LinkState::PRESENT)?;
                Ok(Some(identity_on(sub, new)))
            }
            _ => Ok(None),
        }
    }
}

/// Always returns `sub => sub`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityRule;

impl Replacement for IdentityRule {
    fn info(&self) -> MechanismInfo {
        MechanismInfo::replacement("identity", Mode::Deterministic, Vec::new())
    }

    fn rewrite(&self, sub: &SubGna, _rng: &mut dyn RngCore) -> Result<Option<RewriteEvent>, GnaError> {
        Ok(Some(RewriteEvent::identity(sub)))
    }
}
