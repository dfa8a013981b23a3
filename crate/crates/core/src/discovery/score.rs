//! Bhattacharyya distance and reconstruction scoring.

use std::collections::BTreeMap;

use rand::RngCore;

use super::canon::canonical_key;
use super::training::build_training;
use super::{DiscoveryError, FittedModel};
use crate::gna::{self, Trajectory};
use crate::num::Scalar;

/// Allowed deviation of a distribution's total mass from 1.
pub const NORMALISATION_TOL: f64 = 1e-9;

fn check_normalised<F: Scalar>(name: &str, p: &[F]) -> Result<(), DiscoveryError> {
    let mut total = F::zero();
    for &x in p {
        if !(x >= F::zero()) || !x.is_finite() {
            return Err(DiscoveryError::Normalisation(format!("{name} has an invalid mass {x}")));
        }
        total = total + x;
    }
    if (total.to_f64_lossy() - 1.0).abs() > NORMALISATION_TOL {
        return Err(DiscoveryError::Normalisation(format!("{name} sums to {total}, not 1")));
    }
    Ok(())
}

/// `D_B = -ln sum_i sqrt(p_i q_i)` over aligned supports. Equal inputs give
/// exactly 0; disjoint supports give `+inf`.
pub fn bhattacharyya_slices<F: Scalar>(p: &[F], q: &[F]) -> Result<F, DiscoveryError> {
    if p.len() != q.len() {
        return Err(DiscoveryError::Normalisation(format!("support sizes differ: {} vs {}", p.len(), q.len())));
    }
    check_normalised("p", p)?;
    check_normalised("q", q)?;
    if p == q {
        return Ok(F::zero());
    }
    let bc = p.iter().zip(q).fold(F::zero(), |acc, (&a, &b)| acc + (a * b).sqrt());
    if bc <= F::zero() {
        return Ok(F::infinity());
    }
    Ok((-bc.ln()).max(F::zero()))
}

/// [`bhattacharyya_slices`] over distributions keyed by canonical key; the
/// union of supports is used, missing keys have mass 0.
pub fn bhattacharyya(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> Result<f64, DiscoveryError> {
    let keys: std::collections::BTreeSet<&String> = p.keys().chain(q.keys()).collect();
    let pv: Vec<f64> = keys.iter().map(|k| p.get(*k).copied().unwrap_or(0.0)).collect();
    let qv: Vec<f64> = keys.iter().map(|k| q.get(*k).copied().unwrap_or(0.0)).collect();
    bhattacharyya_slices(&pv, &qv)
}

/// Relative frequencies of `keys`.
pub fn key_distribution<'a, I: IntoIterator<Item = &'a String>>(keys: I) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut n = 0usize;
    for k in keys {
        *counts.entry(k.clone()).or_default() += 1;
        n += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / n as f64)).collect()
}

/// Distribution of the changed cores detected in `traj`.
pub fn core_distribution(traj: &Trajectory) -> Result<BTreeMap<String, f64>, DiscoveryError> {
    let ts = build_training(traj)?;
    Ok(key_distribution(ts.triples.iter().map(|t| &t.core_key)))
}

/// Bhattacharyya distance between the detected core distributions of two
/// trajectories.
pub fn score_trajectories(reference: &Trajectory, other: &Trajectory) -> Result<f64, DiscoveryError> {
    bhattacharyya(&core_distribution(reference)?, &core_distribution(other)?)
}

/// Result of simulating a fitted model against its reference.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub trajectory: Trajectory,
    pub distance: f64,
    /// Steps whose left-hand side had no table entry (identity applied).
    pub misses: usize,
}

/// Runs the fitted model for `steps` steps from the reference's initial
/// configuration and compares the extracted cores: detected cores of the
/// reference against the seed sets the fitted extraction drew.
pub fn reconstruct_and_score(
    fitted: &FittedModel,
    reference: &Trajectory,
    steps: usize,
    rng: &mut dyn RngCore,
) -> Result<Reconstruction, DiscoveryError> {
    let e = fitted.extraction();
    let trajectory = gna::run(&reference.initial, &e, &fitted.table, steps, rng)?;
    let mut keys = Vec::with_capacity(trajectory.steps());
    let mut misses = 0;
    trajectory.replay(|_, before, ev, _| {
        let seeds: std::collections::BTreeSet<_> = ev.old.seeds().iter().copied().collect();
        keys.push(canonical_key(&before.induced(&seeds, ev.old.seeds().to_vec())?));
        if !fitted.table.entries.contains_key(&canonical_key(&ev.old)) {
            misses += 1;
        }
        Ok(())
    })?;
    let p = core_distribution(reference)?;
    let q = key_distribution(keys.iter());
    let distance = if p.is_empty() && q.is_empty() { 0.0 } else { bhattacharyya(&p, &q)? };
    Ok(Reconstruction { trajectory, distance, misses })
}
