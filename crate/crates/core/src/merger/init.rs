use rand::Rng;
use rand_distr::StandardNormal;

use super::{Firm, Individual, MergerError, MergerParams, MergerState, CLOSENESS_FLOOR, INITIAL_STRENGTH_RANGE};
use crate::graph::{harmonic_closeness, UGraph};
use crate::num::Scalar;

/// Two firms with gaussian cultures around centres `separation` apart along
/// the first axis, wired within each firm and then between them.
///
/// Firm A holds ids `0..n`, firm B `n..2n`. Draw order: cultures (A then B),
/// within-firm ties (A then B), between-firm ties (A to B then B to A).
pub fn init_population<F: Scalar, R: Rng + ?Sized>(
    p: &MergerParams<F>,
    rng: &mut R,
) -> Result<MergerState<F>, MergerError> {
    p.validate()?;
    let n = p.n;
    let mut individuals = Vec::with_capacity(2 * n);
    for (k, firm) in [Firm::A, Firm::B].into_iter().enumerate() {
        for i in 0..n {
            let culture = (0..p.dimension)
                .map(|c| {
                    let centre = if c == 0 && k == 1 { p.separation } else { F::zero() };
                    centre + p.noise_sd * F::lit(rng.sample::<f64, _>(StandardNormal))
                })
                .collect();
            individuals.push(Individual { id: k * n + i, firm, index: i + 1, culture });
        }
    }
    let mut state = MergerState::new(individuals);

    let w = p.w.to_f64_lossy();
    let source_weight: Vec<f64> = (1..=n).map(|i| (i as f64 / n as f64).powf(w)).collect();
    for base in [0, n] {
        wire_within(&mut state, base, n, p.within_ties, &source_weight, rng)?;
    }

    let b = p.b.to_f64_lossy();
    let mut endpoint_weight = Vec::with_capacity(2 * n);
    for base in [0, n] {
        let g = UGraph::from_edges(
            n,
            state
                .ties()
                .filter(|&(s, d, _)| s >= base && s < base + n && d >= base && d < base + n)
                .map(|(s, d, _)| (s - base, d - base)),
        );
        let c: Vec<f64> = harmonic_closeness(&g).expect("firm is non-empty");
        endpoint_weight.extend(c.into_iter().map(|c| c.max(CLOSENESS_FLOOR).powf(b)));
    }
    wire_between(&mut state, 0, n, n, p.between_ties, &endpoint_weight, rng)?;
    wire_between(&mut state, n, 0, n, p.between_ties, &endpoint_weight, rng)?;
    Ok(state)
}

fn strength<F: Scalar, R: Rng + ?Sized>(rng: &mut R) -> F {
    let (lo, hi) = INITIAL_STRENGTH_RANGE;
    F::lit(rng.random_range(lo..=hi))
}

/// Index drawn with probability proportional to `weights`; `None` if they
/// sum to zero.
fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut r = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if r < w {
                return Some(i);
            }
            r -= w;
            last = Some(i);
        }
    }
    last
}

/// Sources are drawn by weight times remaining capacity and destinations
/// uniformly among the free slots, which is the rejection sampler's law
/// without its retries.
fn wire_within<F: Scalar, R: Rng + ?Sized>(
    state: &mut MergerState<F>,
    base: usize,
    n: usize,
    quota: usize,
    source_weight: &[f64],
    rng: &mut R,
) -> Result<(), MergerError> {
    for placed in 0..quota {
        let capacity: Vec<f64> =
            (0..n).map(|i| source_weight[i] * (n - 1 - state.out_degree(base + i)) as f64).collect();
        let Some(i) = pick(&capacity, rng) else {
            return Err(MergerError::TieQuota { kind: "within-firm", placed, wanted: quota });
        };
        let src = base + i;
        let free: Vec<usize> = (base..base + n).filter(|&d| d != src && state.strength(src, d).is_none()).collect();
        let dst = free[rng.random_range(0..free.len())];
        let s = strength(rng);
        state.set_tie(src, dst, s);
    }
    Ok(())
}

fn wire_between<F: Scalar, R: Rng + ?Sized>(
    state: &mut MergerState<F>,
    from: usize,
    to: usize,
    n: usize,
    quota: usize,
    weight: &[f64],
    rng: &mut R,
) -> Result<(), MergerError> {
    for placed in 0..quota {
        let free = |src: usize, state: &MergerState<F>| -> Vec<f64> {
            (to..to + n).map(|d| if state.strength(src, d).is_none() { weight[d] } else { 0.0 }).collect()
        };
        let capacity: Vec<f64> = (from..from + n).map(|s| weight[s] * free(s, state).iter().sum::<f64>()).collect();
        let Some(i) = pick(&capacity, rng) else {
            return Err(MergerError::TieQuota { kind: "between-firm", placed, wanted: quota });
        };
        let src = from + i;
        let j = pick(&free(src, state), rng).expect("origin has a free destination");
        let s = strength(rng);
        state.set_tie(src, to + j, s);
    }
    Ok(())
}
