//! Maximum-likelihood fitting of the extraction mechanism.
//!
//! Each event is reduced to its changed core. A family's likelihood for one
//! event is the probability that sequential weighted draws without
//! replacement select exactly the core, summed over draw orders for cores of
//! up to [`ORDER_SUM_LIMIT`] nodes and taken in ascending-id order beyond.
//! Events with an empty core (pure creations) are neutral.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::DiscoveryError;
use crate::gna::{GnaConfig, NodeId, NodeState, SelectionFamily};
use crate::optimize::{coordinate_ascent, golden_section_max};

/// Cores up to this size are scored by summing over all draw orders.
pub const ORDER_SUM_LIMIT: usize = 6;
/// Box bound for every family parameter.
pub const PARAM_BOUNDS: (f64, f64) = (0.0, 10.0);
pub const LINE_TOL: f64 = 1e-6;
pub const MAX_SWEEPS: usize = 100;
/// Relative margin below which two penalised likelihoods count as tied.
pub const TIE_TOL: f64 = 1e-9;

/// What a family can see of one configuration at selection time: node
/// counts grouped by `(degree, state)`, plus the core members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStats {
    pub t: usize,
    pub nodes: usize,
    pub groups: Vec<(usize, NodeState, usize)>,
    /// `(degree, state)` of each core node, ascending id.
    pub core: Vec<(usize, NodeState)>,
}

impl SelectionStats {
    pub fn new(t: usize, config: &GnaConfig, core: &BTreeSet<NodeId>) -> Self {
        let mut groups: BTreeMap<(usize, NodeState), usize> = BTreeMap::new();
        for (_, s, d) in config.degrees() {
            *groups.entry((d, s)).or_default() += 1;
        }
        let core = core.iter().map(|&v| (config.degree(v), config.state(v).unwrap())).collect();
        SelectionStats {
            t,
            nodes: config.node_count(),
            groups: groups.into_iter().map(|((d, s), c)| (d, s, c)).collect(),
            core,
        }
    }

    pub fn is_creation(&self) -> bool {
        self.core.is_empty()
    }

    /// Log-probability that `family` selects exactly this core.
    pub fn log_likelihood(&self, family: &SelectionFamily) -> f64 {
        if self.core.is_empty() {
            return 0.0;
        }
        let total: f64 = self.groups.iter().map(|&(d, s, c)| c as f64 * family.weight(d, s)).sum();
        let w: Vec<f64> = self.core.iter().map(|&(d, s)| family.weight(d, s)).collect();
        if w.len() <= ORDER_SUM_LIMIT {
            let mut idx: Vec<usize> = (0..w.len()).collect();
            let mut p = 0.0;
            loop {
                p += order_probability(&w, &idx, total, self.nodes).exp();
                if !next_perm(&mut idx) {
                    break;
                }
            }
            p.ln()
        } else {
            let idx: Vec<usize> = (0..w.len()).collect();
            order_probability(&w, &idx, total, self.nodes)
        }
    }
}

/// Log-probability of drawing the core in the order `idx`. A draw from zero
/// remaining weight is uniform over the remaining nodes, as in the engine.
fn order_probability(w: &[f64], idx: &[usize], total: f64, nodes: usize) -> f64 {
    let mut remaining = total;
    let mut lp = 0.0;
    for (k, &i) in idx.iter().enumerate() {
        if remaining > 0.0 && remaining.is_finite() {
            if w[i] <= 0.0 {
                return f64::NEG_INFINITY;
            }
            lp += (w[i] / remaining).ln();
        } else {
            lp -= ((nodes - k) as f64).ln();
        }
        remaining -= w[i];
        if remaining < total * 1e-12 {
            remaining = remaining.max(0.0);
        }
    }
    lp
}

fn next_perm(v: &mut [usize]) -> bool {
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

/// Candidate extraction families, in declaration (tie-break) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Candidate {
    Uniform,
    Degree,
    State,
    DegreeState,
}

impl Candidate {
    pub const DEFAULT: [Candidate; 4] =
        [Candidate::Uniform, Candidate::Degree, Candidate::State, Candidate::DegreeState];

    pub fn name(self) -> &'static str {
        match self {
            Candidate::Uniform => "uniform",
            Candidate::Degree => "degree",
            Candidate::State => "state",
            Candidate::DegreeState => "degree-state",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, DiscoveryError> {
        match name {
            "uniform" => Ok(Candidate::Uniform),
            "degree" => Ok(Candidate::Degree),
            "state" => Ok(Candidate::State),
            "degree-state" => Ok(Candidate::DegreeState),
            "motif" => Err(DiscoveryError::Gna(crate::gna::GnaError::UnsupportedFamily(name.into()))),
            other => Err(DiscoveryError::Gna(crate::gna::GnaError::UnknownFamily(other.into()))),
        }
    }

    fn family(self, x: &[f64], states: &[NodeState]) -> SelectionFamily {
        let weights = |ws: &[f64]| states.iter().copied().zip(ws.iter().copied()).collect();
        match self {
            Candidate::Uniform => SelectionFamily::Uniform,
            Candidate::Degree => SelectionFamily::DegreePreferential { exponent: x[0] },
            Candidate::State => SelectionFamily::StateWeighted { weights: weights(x) },
            Candidate::DegreeState => SelectionFamily::DegreeState { exponent: x[0], weights: weights(&x[1..]) },
        }
    }

    fn dims(self, k: usize) -> usize {
        match self {
            Candidate::Uniform => 0,
            Candidate::Degree => 1,
            Candidate::State => k,
            Candidate::DegreeState => 1 + k,
        }
    }

    /// Free parameters; state weights are defined up to scale.
    pub fn free_params(self, k: usize) -> usize {
        let sw = k.saturating_sub(1);
        match self {
            Candidate::Uniform => 0,
            Candidate::Degree => 1,
            Candidate::State => sw,
            Candidate::DegreeState => 1 + sw,
        }
    }
}

/// Fit of one candidate family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFit {
    pub candidate: Candidate,
    pub family: SelectionFamily,
    pub log_likelihood: f64,
    pub free_params: usize,
    /// `log_likelihood - free_params * ln(n) / 2`, `n` the number of
    /// non-creation events.
    pub penalised: f64,
}

/// Fits every candidate and returns the fits plus the winner's index: the
/// highest penalised log-likelihood, ties going to the earlier candidate.
pub fn fit_extraction(
    pairs: &[SelectionStats],
    candidates: &[Candidate],
    states: &BTreeSet<NodeState>,
) -> Result<(Vec<CandidateFit>, usize), DiscoveryError> {
    if pairs.is_empty() {
        return Err(DiscoveryError::NoData("no extraction pairs".into()));
    }
    if candidates.is_empty() {
        return Err(DiscoveryError::NoData("empty candidate set".into()));
    }
    let states: Vec<NodeState> = states.iter().copied().collect();
    let scored: Vec<&SelectionStats> = pairs.iter().filter(|p| !p.is_creation()).collect();
    let n = scored.len().max(1) as f64;
    let total = |fam: &SelectionFamily| scored.iter().map(|p| p.log_likelihood(fam)).sum::<f64>();

    let fits: Vec<CandidateFit> = candidates
        .iter()
        .map(|&c| {
            let dims = c.dims(states.len());
            let (x, ll) = match dims {
                0 => (Vec::new(), total(&c.family(&[], &states))),
                1 => {
                    let m = golden_section_max(
                        |a| total(&c.family(&[a], &states)),
                        PARAM_BOUNDS.0,
                        PARAM_BOUNDS.1,
                        LINE_TOL,
                    );
                    (vec![m.arg], m.value)
                }
                _ => {
                    let start = vec![1.0; dims];
                    let bounds = vec![PARAM_BOUNDS; dims];
                    coordinate_ascent(|x| total(&c.family(x, &states)), &start, &bounds, LINE_TOL, MAX_SWEEPS)
                }
            };
            let k = c.free_params(states.len());
            CandidateFit {
                candidate: c,
                family: c.family(&x, &states),
                log_likelihood: ll,
                free_params: k,
                penalised: ll - 0.5 * k as f64 * n.ln(),
            }
        })
        .collect();
    let mut winner = 0;
    for (i, f) in fits.iter().enumerate() {
        let best = fits[winner].penalised;
        if f.penalised > best + TIE_TOL * best.abs().max(1.0) {
            winner = i;
        }
    }
    if !fits[winner].log_likelihood.is_finite() {
        return Err(DiscoveryError::NoData("every candidate assigns zero probability to the data".into()));
    }
    Ok((fits, winner))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(groups: &[(usize, u64, usize)], core: &[(usize, u64)]) -> SelectionStats {
        SelectionStats {
            t: 0,
            nodes: groups.iter().map(|g| g.2).sum(),
            groups: groups.iter().map(|&(d, s, c)| (d, NodeState(s), c)).collect(),
            core: core.iter().map(|&(d, s)| (d, NodeState(s))).collect(),
        }
    }

    #[test]
    fn uniform_single_draw() {
        let p = stats(&[(1, 0, 4), (3, 0, 1)], &[(3, 0)]);
        assert!((p.log_likelihood(&SelectionFamily::Uniform) - (0.2f64).ln()).abs() < 1e-12);
        let deg = SelectionFamily::DegreePreferential { exponent: 1.0 };
        assert!((p.log_likelihood(&deg) - (3.0f64 / 7.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn pair_sums_both_orders() {
        // weights 1, 2, 3; core {2, 3}: 2/6 * 3/4 + 3/6 * 2/3
        let p = stats(&[(1, 0, 1), (2, 0, 1), (3, 0, 1)], &[(2, 0), (3, 0)]);
        let deg = SelectionFamily::DegreePreferential { exponent: 1.0 };
        let expect: f64 = 2.0 / 6.0 * 3.0 / 4.0 + 3.0 / 6.0 * 2.0 / 3.0;
        assert!((p.log_likelihood(&deg) - expect.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_core_is_impossible() {
        let p = stats(&[(0, 0, 1), (2, 0, 3)], &[(0, 0)]);
        let deg = SelectionFamily::DegreePreferential { exponent: 1.0 };
        assert_eq!(p.log_likelihood(&deg), f64::NEG_INFINITY);
        let flat = SelectionFamily::DegreePreferential { exponent: 0.0 };
        assert!((p.log_likelihood(&flat) - (0.25f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn creation_is_neutral() {
        let p = stats(&[(1, 0, 3)], &[]);
        assert_eq!(p.log_likelihood(&SelectionFamily::Uniform), 0.0);
    }

    #[test]
    fn equal_likelihoods_pick_first_candidate() {
        let pairs = vec![stats(&[(2, 0, 4)], &[(2, 0)])];
        let (fits, w) = fit_extraction(&pairs, &Candidate::DEFAULT, &BTreeSet::from([NodeState(0)])).unwrap();
        assert_eq!(w, 0);
        for f in &fits {
            assert!((f.log_likelihood - fits[0].log_likelihood).abs() < 1e-12);
        }
        let reversed = [Candidate::Degree, Candidate::Uniform];
        let (_, w) = fit_extraction(&pairs, &reversed, &BTreeSet::from([NodeState(0)])).unwrap();
        assert_eq!(w, 0);
    }

    #[test]
    fn degree_exponent_recovered() {
        // hub of degree 4 chosen 4 times out of 5 against four leaves: under
        // degree^a, p(hub) = 4^a / (4^a + 4); MLE at p = 0.8, a = 2
        let hub = stats(&[(4, 0, 1), (1, 0, 4)], &[(4, 0)]);
        let leaf = stats(&[(4, 0, 1), (1, 0, 4)], &[(1, 0)]);
        let pairs = vec![hub.clone(), hub.clone(), hub.clone(), hub, leaf];
        let (fits, _) = fit_extraction(&pairs, &[Candidate::Degree], &BTreeSet::from([NodeState(0)])).unwrap();
        match fits[0].family {
            SelectionFamily::DegreePreferential { exponent } => assert!((exponent - 2.0).abs() < 1e-4),
            _ => unreachable!(),
        }
    }

    #[test]
    fn motif_is_registered_but_unsupported() {
        assert!(matches!(
            Candidate::from_name("motif"),
            Err(DiscoveryError::Gna(crate::gna::GnaError::UnsupportedFamily(_)))
        ));
        assert!(Candidate::from_name("banana").is_err());
    }
}
