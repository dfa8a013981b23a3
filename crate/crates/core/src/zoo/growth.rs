//! Network growth models.

use std::collections::BTreeMap;

use rand::{Rng, RngCore};

use super::rules::{AttachNewcomer, BirthDeathRule, NewcomerState, StateBasedRule};
use super::{GnaModel, ZooError};
use crate::gna::{
    seeded_sub, Context, Extraction, GnaConfig, LinkState, MechanismInfo, Mode, NodeId, NodeSelection, NodeState,
    Selected, SelectionFamily, SubGna,
};

pub const BLUE: NodeState = NodeState(0);
pub const RED: NodeState = NodeState(1);

fn seed_clique(size: usize, alphabet: &[NodeState], state: impl Fn(usize) -> NodeState) -> GnaConfig {
    let mut c = GnaConfig::with_alphabet(alphabet.iter().copied());
    let ids: Vec<NodeId> = (0..size).map(|i| c.add_node(state(i)).expect("state in alphabet")).collect();
    for i in 0..size {
        for j in 0..i {
            c.add_link(ids[i], ids[j], LinkState::PRESENT).unwrap();
        }
    }
    c
}

fn check_growth(n_final: usize, m: usize) -> Result<(), ZooError> {
    if m < 1 {
        return Err(ZooError::Param("links_per_node must be >= 1".into()));
    }
    if n_final < m + 1 {
        return Err(ZooError::Param(format!("n_final = {n_final} is smaller than the seed clique of {} nodes", m + 1)));
    }
    Ok(())
}

fn attachment_growth(name: &str, family: SelectionFamily, n_final: usize, m: usize) -> Result<GnaModel, ZooError> {
    check_growth(n_final, m)?;
    Ok(GnaModel {
        name: name.into(),
        extraction: Box::new(NodeSelection::new(family, m).stop_at(n_final)),
        replacement: Box::new(AttachNewcomer::new(NewcomerState::Fixed(BLUE))),
        initial: seed_clique(m + 1, &[BLUE], |_| BLUE),
    })
}

/// Barabási–Albert growth: each newcomer links to `m` distinct existing
/// nodes drawn with probability proportional to degree, until the network
/// has `n_final` nodes. Starts from an `(m+1)`-clique.
pub fn ba_growth(n_final: usize, m: usize) -> Result<GnaModel, ZooError> {
    attachment_growth("ba", SelectionFamily::DegreePreferential { exponent: 1.0 }, n_final, m)
}

/// Growth by uniformly random attachment (degree-blind control model).
pub fn uniform_growth(n_final: usize, m: usize) -> Result<GnaModel, ZooError> {
    attachment_growth("uniform-growth", SelectionFamily::Uniform, n_final, m)
}

fn check_prob(name: &str, p: f64) -> Result<(), ZooError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(ZooError::Param(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStateParams {
    pub n_final: usize,
    /// Attachment weight is `degree * (1 + modulation * [target is red])`.
    pub modulation: f64,
    /// Probability that a newcomer is red.
    pub red_prob: f64,
    /// Probability that the target adopts the newcomer's state.
    pub adopt_prob: f64,
}

impl Default for DegreeStateParams {
    fn default() -> Self {
        DegreeStateParams { n_final: 500, modulation: 4.0, red_prob: 0.5, adopt_prob: 0.1 }
    }
}

/// Degree-state growth: preferential attachment whose weights are modulated
/// by the target's state; newcomers get a random state, and the target may
/// adopt it. With `modulation = 0` and `adopt_prob = 0` the topology follows
/// plain BA growth.
pub fn degree_state_growth(p: &DegreeStateParams) -> Result<GnaModel, ZooError> {
    check_growth(p.n_final, 1)?;
    check_prob("red_prob", p.red_prob)?;
    check_prob("adopt_prob", p.adopt_prob)?;
    if !(p.modulation >= 0.0 && p.modulation.is_finite()) {
        return Err(ZooError::Param("modulation must be finite and >= 0".into()));
    }
    let weights = BTreeMap::from([(BLUE, 1.0), (RED, 1.0 + p.modulation)]);
    let mut rule = AttachNewcomer::new(NewcomerState::Random(vec![(BLUE, 1.0 - p.red_prob), (RED, p.red_prob)]));
    rule.adopt_prob = p.adopt_prob;
    Ok(GnaModel {
        name: "degree-state".into(),
        extraction: Box::new(
            NodeSelection::new(SelectionFamily::DegreeState { exponent: 1.0, weights }, 1).stop_at(p.n_final),
        ),
        replacement: Box::new(rule),
        initial: seed_clique(2, &[BLUE, RED], |i| if i == 0 { RED } else { BLUE }),
    })
}

/// Extraction of the state-based model: with probability `newcomer_rate`
/// nothing (a creation step); otherwise a uniformly random red node and a
/// uniformly random other node.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBasedSelection {
    pub red: NodeState,
    pub newcomer_rate: f64,
}

impl Extraction for StateBasedSelection {
    fn info(&self) -> MechanismInfo {
        MechanismInfo::extraction(
            "red-and-random",
            Mode::Stochastic,
            vec![("newcomer_rate".into(), self.newcomer_rate)],
        )
    }

    fn required_states(&self) -> Vec<NodeState> {
        vec![self.red]
    }

    fn select(&self, config: &GnaConfig, rng: &mut dyn RngCore) -> Result<Selected, crate::gna::GnaError> {
        let empty = || Ok(Selected::Sub(SubGna::empty(config.next_id())));
        if self.newcomer_rate > 0.0 && rng.random::<f64>() < self.newcomer_rate {
            return empty();
        }
        let reds: Vec<NodeId> = config.states().filter(|(_, s)| *s == self.red).map(|(v, _)| v).collect();
        if reds.is_empty() || config.node_count() < 2 {
            return empty();
        }
        let r = reds[rng.random_range(0..reds.len())];
        let others: Vec<NodeId> = config.node_ids().filter(|&v| v != r).collect();
        let o = others[rng.random_range(0..others.len())];
        Ok(Selected::Sub(seeded_sub(config, vec![r, o], Context::SeedsOnly)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateBasedParams {
    pub initial_nodes: usize,
    pub newcomer_rate: f64,
    pub red_prob: f64,
}

impl Default for StateBasedParams {
    fn default() -> Self {
        StateBasedParams { initial_nodes: 5, newcomer_rate: 0.2, red_prob: 0.2 }
    }
}

/// State-based growth: repeated random edge addition between a red node and
/// any other node, interleaved with isolated newcomers of random state.
/// Node 0 of the initial configuration is red, the rest blue.
pub fn state_based_growth(p: &StateBasedParams) -> Result<GnaModel, ZooError> {
    check_prob("newcomer_rate", p.newcomer_rate)?;
    check_prob("red_prob", p.red_prob)?;
    if p.initial_nodes < 2 {
        return Err(ZooError::Param("state-based model needs at least 2 initial nodes".into()));
    }
    let mut initial = GnaConfig::with_alphabet([BLUE, RED]);
    for i in 0..p.initial_nodes {
        initial.add_node(if i == 0 { RED } else { BLUE }).unwrap();
    }
    Ok(GnaModel {
        name: "state-based".into(),
        extraction: Box::new(StateBasedSelection { red: RED, newcomer_rate: p.newcomer_rate }),
        replacement: Box::new(StateBasedRule {
            newcomer: NewcomerState::Random(vec![(BLUE, 1.0 - p.red_prob), (RED, p.red_prob)]),
        }),
        initial,
    })
}

/// Forest-fire extraction: a uniformly random ambassador, then recursive
/// burning. Each burning node ignites a geometric number (mean
/// `p / (1 - p)`) of its not-yet-burned neighbours, links treated as
/// undirected. Seeds are the burned nodes in burning order.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestFireSelection {
    pub burn_prob: f64,
    pub stop_at_nodes: usize,
}

impl Extraction for ForestFireSelection {
    fn info(&self) -> MechanismInfo {
        MechanismInfo::extraction("forest-fire", Mode::Stochastic, vec![("burn_prob".into(), self.burn_prob)])
    }

    fn select(&self, config: &GnaConfig, rng: &mut dyn RngCore) -> Result<Selected, crate::gna::GnaError> {
        if config.node_count() >= self.stop_at_nodes || config.is_empty() {
            return Ok(Selected::Quiescent);
        }
        let ids: Vec<NodeId> = config.node_ids().collect();
        let amb = ids[rng.random_range(0..ids.len())];
        let mut burned = vec![amb];
        let mut i = 0;
        while i < burned.len() {
            let x = burned[i];
            i += 1;
            let mut k = 0usize;
            while self.burn_prob > 0.0 && rng.random::<f64>() < self.burn_prob {
                k += 1;
            }
            if k == 0 {
                continue;
            }
            let mut fresh: Vec<NodeId> = config.neighbors(x).into_iter().filter(|v| !burned.contains(v)).collect();
            for _ in 0..k.min(fresh.len()) {
                let j = rng.random_range(0..fresh.len());
                burned.push(fresh.swap_remove(j));
            }
        }
        Ok(Selected::Sub(seeded_sub(config, burned, Context::SeedsOnly)?))
    }
}

/// Forest-fire growth (forward burning only, one ambassador). Defaults:
/// `burn_prob = 0.35`.
pub fn forest_fire_growth(n_final: usize, burn_prob: f64) -> Result<GnaModel, ZooError> {
    check_prob("burn_prob", burn_prob)?;
    if burn_prob >= 1.0 {
        return Err(ZooError::Param("burn_prob must be < 1".into()));
    }
    if n_final < 1 {
        return Err(ZooError::Param("n_final must be >= 1".into()));
    }
    let mut initial = GnaConfig::with_alphabet([BLUE]);
    initial.add_node(BLUE).unwrap();
    Ok(GnaModel {
        name: "forest-fire".into(),
        extraction: Box::new(ForestFireSelection { burn_prob, stop_at_nodes: n_final }),
        replacement: Box::new(AttachNewcomer::new(NewcomerState::Fixed(BLUE))),
        initial,
    })
}

/// Random birth and death on uniformly chosen nodes: the chosen node is
/// deleted with probability `delete_prob`, otherwise a newcomer attaches to
/// it. Starts from a directed ring of `initial_nodes` nodes.
pub fn birth_death(initial_nodes: usize, delete_prob: f64) -> Result<GnaModel, ZooError> {
    check_prob("delete_prob", delete_prob)?;
    if initial_nodes < 1 {
        return Err(ZooError::Param("initial_nodes must be >= 1".into()));
    }
    let mut initial = GnaConfig::with_alphabet([BLUE, RED]);
    let ids: Vec<NodeId> =
        (0..initial_nodes).map(|i| initial.add_node(if i % 2 == 0 { BLUE } else { RED }).unwrap()).collect();
    if initial_nodes > 1 {
        for i in 0..initial_nodes {
            initial.add_link(ids[i], ids[(i + 1) % initial_nodes], LinkState::PRESENT).unwrap();
        }
    }
    Ok(GnaModel {
        name: "birth-death".into(),
        extraction: Box::new(NodeSelection::new(SelectionFamily::Uniform, 1)),
        replacement: Box::new(BirthDeathRule {
            delete_prob,
            newcomer: AttachNewcomer::new(NewcomerState::Random(vec![(BLUE, 0.5), (RED, 0.5)])),
        }),
        initial,
    })
}
