use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::config::{GnaConfig, NodeId, NodeState};
use super::sub::{RewriteEvent, SubGna};
use super::GnaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    Extraction,
    Replacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Deterministic,
    Stochastic,
}

/// Self-description of a mechanism: kind, family or rule name, mode and
/// real-valued parameters. Used in manifests and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismInfo {
    pub kind: MechanismKind,
    pub name: String,
    pub mode: Mode,
    pub params: Vec<(String, f64)>,
}

impl MechanismInfo {
    pub fn extraction(name: impl Into<String>, mode: Mode, params: Vec<(String, f64)>) -> Self {
        MechanismInfo { kind: MechanismKind::Extraction, name: name.into(), mode, params }
    }

    pub fn replacement(name: impl Into<String>, mode: Mode, params: Vec<(String, f64)>) -> Self {
        MechanismInfo { kind: MechanismKind::Replacement, name: name.into(), mode, params }
    }
}

/// Outcome of an extraction: a sub-network to rewrite, or quiescence (no
/// further rewriting is applicable).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selected {
    Sub(SubGna),
    Quiescent,
}

/// Extraction mechanism `E`: picks the part of the configuration to rewrite.
pub trait Extraction: Send + Sync {
    fn info(&self) -> MechanismInfo;

    /// Node states the mechanism refers to; checked against the
    /// configuration's alphabet before extraction.
    fn required_states(&self) -> Vec<NodeState> {
        Vec::new()
    }

    fn select(&self, config: &GnaConfig, rng: &mut dyn RngCore) -> Result<Selected, GnaError>;
}

/// Replacement mechanism `R`: produces the new sub-network and the node
/// correspondence. `Ok(None)` means no rule applies to `sub`.
pub trait Replacement: Send + Sync {
    fn info(&self) -> MechanismInfo;

    fn rewrite(&self, sub: &SubGna, rng: &mut dyn RngCore) -> Result<Option<RewriteEvent>, GnaError>;

    /// Whether a miss degrades to the identity event instead of an error.
    fn identity_fallback(&self) -> bool {
        false
    }
}

/// Node-selection distribution over a configuration.
///
/// Each family assigns every node a non-negative weight from its total
/// degree and state; extraction draws seed nodes sequentially without
/// replacement with probability proportional to the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SelectionFamily {
    Uniform,
    DegreePreferential { exponent: f64 },
    StateWeighted { weights: BTreeMap<NodeState, f64> },
    DegreeState { exponent: f64, weights: BTreeMap<NodeState, f64> },
}

impl SelectionFamily {
    /// Registry names, in the default candidate order.
    pub const NAMES: [&'static str; 4] = ["uniform", "degree", "state", "degree-state"];

    pub fn name(&self) -> &'static str {
        match self {
            SelectionFamily::Uniform => "uniform",
            SelectionFamily::DegreePreferential { .. } => "degree",
            SelectionFamily::StateWeighted { .. } => "state",
            SelectionFamily::DegreeState { .. } => "degree-state",
        }
    }

    /// Weight of a node with the given total degree and state. States absent
    /// from a weight table get weight 1.
    pub fn weight(&self, degree: usize, state: NodeState) -> f64 {
        let sw = |w: &BTreeMap<NodeState, f64>| w.get(&state).copied().unwrap_or(1.0);
        match self {
            SelectionFamily::Uniform => 1.0,
            SelectionFamily::DegreePreferential { exponent } => degree_power(degree, *exponent),
            SelectionFamily::StateWeighted { weights } => sw(weights),
            SelectionFamily::DegreeState { exponent, weights } => degree_power(degree, *exponent) * sw(weights),
        }
    }

    pub fn params(&self) -> Vec<(String, f64)> {
        let ws = |w: &BTreeMap<NodeState, f64>| w.iter().map(|(s, v)| (format!("w{}", s.0), *v)).collect::<Vec<_>>();
        match self {
            SelectionFamily::Uniform => Vec::new(),
            SelectionFamily::DegreePreferential { exponent } => vec![("alpha".into(), *exponent)],
            SelectionFamily::StateWeighted { weights } => ws(weights),
            SelectionFamily::DegreeState { exponent, weights } => {
                let mut p = vec![("alpha".to_string(), *exponent)];
                p.extend(ws(weights));
                p
            }
        }
    }

    /// Builds a family from its registry name. Parameters: `alpha` for the
    /// degree exponent, `w<state>` for state weights.
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self, GnaError> {
        let alpha = params.get("alpha").copied().unwrap_or(1.0);
        let mut weights = BTreeMap::new();
        for (k, v) in params {
            if let Some(s) = k.strip_prefix('w') {
                let s: u64 = s.parse().map_err(|_| GnaError::Config(format!("bad state weight key `{k}`")))?;
                if *v < 0.0 || !v.is_finite() {
                    return Err(GnaError::Config(format!("state weight `{k}` must be finite and >= 0")));
                }
                weights.insert(NodeState(s), *v);
            }
        }
        match name {
            "uniform" => Ok(SelectionFamily::Uniform),
            "degree" => Ok(SelectionFamily::DegreePreferential { exponent: alpha }),
            "state" => Ok(SelectionFamily::StateWeighted { weights }),
            "degree-state" => Ok(SelectionFamily::DegreeState { exponent: alpha, weights }),
            "motif" => Err(GnaError::UnsupportedFamily(name.to_string())),
            other => Err(GnaError::UnknownFamily(other.to_string())),
        }
    }

    fn required_states(&self) -> Vec<NodeState> {
        match self {
            SelectionFamily::StateWeighted { weights } | SelectionFamily::DegreeState { weights, .. } => {
                weights.keys().copied().collect()
            }
            _ => Vec::new(),
        }
    }
}

/// `degree^exponent` with `0^0 = 1`.
fn degree_power(degree: usize, exponent: f64) -> f64 {
    if exponent == 1.0 {
        degree as f64
    } else {
        (degree as f64).powf(exponent)
    }
}

impl fmt::Display for SelectionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for (k, v) in self.params() {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// Draws `k` distinct items, sequentially, with probability proportional to
/// `weights` among the items not drawn yet. When the remaining weight is zero
/// the draw falls back to uniform over the remaining items.
pub fn weighted_draws(weights: &[f64], k: usize, rng: &mut dyn RngCore) -> Vec<usize> {
    let mut w = weights.to_vec();
    let mut alive = vec![true; w.len()];
    let mut out = Vec::with_capacity(k);
    for _ in 0..k.min(w.len()) {
        let total: f64 = w.iter().sum();
        let pick = if total > 0.0 && total.is_finite() {
            let mut u = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &wi) in w.iter().enumerate() {
                if wi <= 0.0 {
                    continue;
                }
                if u < wi {
                    pick = Some(i);
                    break;
                }
                u -= wi;
            }
            // rounding can leave u just past the last positive weight
            pick.unwrap_or_else(|| w.iter().rposition(|&x| x > 0.0).unwrap())
        } else {
            let remaining: Vec<usize> = (0..w.len()).filter(|&i| alive[i]).collect();
            remaining[rng.random_range(0..remaining.len())]
        };
        alive[pick] = false;
        w[pick] = 0.0;
        out.push(pick);
    }
    out
}

/// How many seed nodes an extraction draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SeedCount {
    Fixed(usize),
    /// Empirical distribution `(count, probability)`.
    Distribution(Vec<(usize, f64)>),
}

impl SeedCount {
    fn sample(&self, rng: &mut dyn RngCore) -> usize {
        match self {
            SeedCount::Fixed(k) => *k,
            SeedCount::Distribution(d) => {
                let w: Vec<f64> = d.iter().map(|(_, p)| *p).collect();
                match weighted_draws(&w, 1, rng).first() {
                    Some(&i) => d[i].0,
                    None => 0,
                }
            }
        }
    }
}

/// What surrounds the seeds in the extracted sub-network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Context {
    SeedsOnly,
    /// Seeds plus every node with a link into a seed.
    InNeighbors,
}

/// Generic extraction: draw seeds from a [`SelectionFamily`], optionally add
/// their in-neighbourhood, and report quiescence once the network reaches a
/// node budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSelection {
    pub family: SelectionFamily,
    pub count: SeedCount,
    pub context: Context,
    pub stop_at_nodes: Option<usize>,
}

impl NodeSelection {
    pub fn new(family: SelectionFamily, count: usize) -> Self {
        NodeSelection { family, count: SeedCount::Fixed(count), context: Context::SeedsOnly, stop_at_nodes: None }
    }

    pub fn with_context(mut self, context: Context) -> Self {
        self.context = context;
        self
    }

    pub fn with_count(mut self, count: SeedCount) -> Self {
        self.count = count;
        self
    }

    pub fn stop_at(mut self, nodes: usize) -> Self {
        self.stop_at_nodes = Some(nodes);
        self
    }
}

/// Seeds plus (optionally) their in-neighbours, as an induced sub-network.
pub fn seeded_sub(config: &GnaConfig, seeds: Vec<NodeId>, context: Context) -> Result<SubGna, GnaError> {
    let mut set: BTreeSet<NodeId> = seeds.iter().copied().collect();
    if context == Context::InNeighbors {
        for s in &seeds {
            set.extend(config.in_links(*s).iter().map(|l| l.dst));
        }
    }
    config.induced(&set, seeds)
}

impl Extraction for NodeSelection {
    fn info(&self) -> MechanismInfo {
        let mut params = self.family.params();
        if let SeedCount::Fixed(k) = self.count {
            params.push(("count".into(), k as f64));
        }
        MechanismInfo::extraction(self.family.name(), Mode::Stochastic, params)
    }

    fn required_states(&self) -> Vec<NodeState> {
        self.family.required_states()
    }

    fn select(&self, config: &GnaConfig, rng: &mut dyn RngCore) -> Result<Selected, GnaError> {
        if let Some(stop) = self.stop_at_nodes {
            if config.node_count() >= stop {
                return Ok(Selected::Quiescent);
            }
        }
        let k = self.count.sample(rng);
        if k == 0 {
            return Ok(Selected::Sub(SubGna::empty(config.next_id())));
        }
        if config.is_empty() {
            return Ok(Selected::Quiescent);
        }
        let seeds: Vec<NodeId> = if self.family == SelectionFamily::Uniform {
            let n = config.node_count();
            rand::seq::index::sample(rng, n, k.min(n)).into_iter().map(|i| config.nth_id(i)).collect()
        } else {
            let (ids, w): (Vec<NodeId>, Vec<f64>) =
                config.degrees().map(|(v, s, d)| (v, self.family.weight(d, s))).unzip();
            weighted_draws(&w, k, rng).into_iter().map(|i| ids[i]).collect()
        };
        Ok(Selected::Sub(seeded_sub(config, seeds, self.context)?))
    }
}

/// Extraction that always selects nothing: pure creation mechanisms.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmptySelection;

impl Extraction for EmptySelection {
    fn info(&self) -> MechanismInfo {
        MechanismInfo::extraction("empty", Mode::Deterministic, Vec::new())
    }

    fn select(&self, config: &GnaConfig, _rng: &mut dyn RngCore) -> Result<Selected, GnaError> {
        Ok(Selected::Sub(SubGna::empty(config.next_id())))
    }
}

/// Builds a registered extraction family by name with a fixed seed count.
pub fn extraction_by_name(
    name: &str,
    params: &BTreeMap<String, f64>,
    count: usize,
) -> Result<Box<dyn Extraction>, GnaError> {
    if name == "empty" {
        return Ok(Box::new(EmptySelection));
    }
    let family = SelectionFamily::from_name(name, params)?;
    Ok(Box::new(NodeSelection::new(family, count)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gna::LinkState;
    use crate::rng::seeded;

    #[test]
    fn registry() {
        let p = BTreeMap::new();
        assert!(matches!(extraction_by_name("bogus", &p, 1), Err(GnaError::UnknownFamily(_))));
        assert!(matches!(extraction_by_name("motif", &p, 1), Err(GnaError::UnsupportedFamily(_))));
        for n in SelectionFamily::NAMES {
            assert_eq!(SelectionFamily::from_name(n, &p).unwrap().name(), n);
        }
    }

    #[test]
    fn zero_degree_weight() {
        let f = SelectionFamily::DegreePreferential { exponent: 0.0 };
        assert_eq!(f.weight(0, NodeState(0)), 1.0);
        let f = SelectionFamily::DegreePreferential { exponent: 1.5 };
        assert_eq!(f.weight(0, NodeState(0)), 0.0);
    }

    #[test]
    fn draws_are_distinct_and_fall_back() {
        let mut rng = seeded(1);
        let d = weighted_draws(&[0.0, 0.0, 5.0], 3, &mut rng);
        let mut s = d.clone();
        s.sort();
        assert_eq!(s, vec![0, 1, 2]);
        assert_eq!(d[0], 2);
    }

    #[test]
    fn in_neighbor_context() {
        let mut c = GnaConfig::new();
        let a = c.add_node(NodeState(0)).unwrap();
        let b = c.add_node(NodeState(0)).unwrap();
        let d = c.add_node(NodeState(0)).unwrap();
        c.add_link(a, b, LinkState::PRESENT).unwrap();
        c.add_link(b, d, LinkState::PRESENT).unwrap();
        let s = seeded_sub(&c, vec![b], Context::InNeighbors).unwrap();
        assert_eq!(s.node_set(), [a, b].into_iter().collect());
        assert_eq!(s.seeds(), &[b]);
    }
}
