use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{LinkType, OpAgent, OpNetError};
use crate::num::Scalar;

/// Normalised Shannon entropy of a heterotype histogram,
/// `-(1/ln K) sum x_k ln x_k`; 0 when `K <= 1`. Zero counts are ignored.
pub fn entropy_of_counts<F: Scalar>(counts: &[usize]) -> F {
    let counts: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    if counts.len() <= 1 {
        return F::zero();
    }
    let total = F::from_count(counts.iter().sum());
    let h = counts.iter().fold(F::zero(), |acc, &c| {
        let x = F::from_count(c) / total;
        acc - x * x.ln()
    });
    (h / F::from_count(counts.len()).ln()).max(F::zero()).min(F::one())
}

fn histogram<'a, I: IntoIterator<Item = &'a OpAgent>>(agents: I, prefix: usize) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for a in agents {
        *h.entry(a.heterotype(prefix)).or_insert(0) += 1;
    }
    h
}

/// Network entropy of `agents` with heterotypes keyed on the first
/// `prefix` attributes.
pub fn network_entropy<F: Scalar>(agents: &[OpAgent], prefix: usize) -> Result<F, OpNetError> {
    if agents.is_empty() {
        return Err(OpNetError::EmptyAgents);
    }
    let counts: Vec<usize> = histogram(agents, prefix).into_values().collect();
    Ok(entropy_of_counts(&counts))
}

/// `(K, S)` for a possibly empty agent set; the empty set reports `(0, 0)`.
pub(crate) fn network_entropy_of<'a, I: IntoIterator<Item = &'a OpAgent>>(agents: I, prefix: usize) -> (usize, f64) {
    let counts: Vec<usize> = histogram(agents, prefix).into_values().collect();
    (counts.len(), entropy_of_counts(&counts))
}

/// Per-tick network summary; the CSV columns follow [`METRICS_HEADER`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpMetrics {
    pub tick: u64,
    pub nodes: usize,
    pub links: usize,
    pub max_weight: u64,
    pub min_weight: u64,
    pub avg_weight: f64,
    pub heterotypes: usize,
    pub entropy: f64,
}

pub const METRICS_HEADER: &str = "tick,nodes,links,max_weight,min_weight,avg_weight,heterotypes,entropy";

impl OpMetrics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{},{:.6}",
            self.tick,
            self.nodes,
            self.links,
            self.max_weight,
            self.min_weight,
            self.avg_weight,
            self.heterotypes,
            self.entropy
        )
    }
}

/// Sphere of influence of `center`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sphere {
    pub center: usize,
    pub nodes: BTreeSet<usize>,
    pub links: Vec<(usize, usize, LinkType, u64)>,
    /// `|sphere| / |network|`.
    pub fraction: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;

    fn agents(keys: &[&str]) -> Vec<OpAgent> {
        keys.iter()
            .map(|k| OpAgent {
                name: k.to_string(),
                sigma: k.split('/').map(String::from).collect(),
                class: super::super::AgentClass::Actor,
                knowledge: BTreeMap::new(),
            })
            .collect()
    }

    #[test]
    fn single_heterotype_is_zero() {
        assert_eq!(entropy_of_counts::<f64>(&[7]), 0.0);
        let a = agents(&["actor/air/air/x", "actor/air/air/y"]);
        assert_eq!(network_entropy::<f64>(&a, 3).unwrap(), 0.0);
        assert!((network_entropy::<f64>(&a, 4).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_is_one() {
        assert!((entropy_of_counts::<f64>(&[5, 5, 5]) - 1.0).abs() < 1e-15);
        assert!((entropy_of_counts::<f32>(&[2, 2]) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn three_to_one_split() {
        // -(0.75 ln 0.75 + 0.25 ln 0.25) / ln 2
        let expected = 0.811_278_124_459_132_8;
        assert!((entropy_of_counts::<f64>(&[3, 1]) - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_agent_list_is_an_error() {
        assert_eq!(network_entropy::<f64>(&[], 3), Err(OpNetError::EmptyAgents));
    }

    #[test]
    fn random_histograms_stay_in_range() {
        let mut rng = seeded(11);
        for _ in 0..10_000 {
            let k = rng.random_range(1..12);
            let counts: Vec<usize> = (0..k).map(|_| rng.random_range(0..50)).collect();
            let s: f64 = entropy_of_counts(&counts);
            assert!((0.0..=1.0).contains(&s), "{counts:?} -> {s}");
        }
    }

    proptest! {
        #[test]
        fn duplicate_heterotype_keeps_k(counts in proptest::collection::vec(1usize..20, 1..8), pick in 0usize..8) {
            let names: Vec<String> = counts.iter().enumerate()
                .flat_map(|(i, &c)| std::iter::repeat_n(format!("actor/air/t{i}"), c)).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let mut a = agents(&refs);
            let before = histogram(&a, 3).len();
            let dup = a[pick % a.len()].clone();
            a.push(dup);
            prop_assert_eq!(histogram(&a, 3).len(), before);
        }
    }
}
