//! Post-merger cultural integration on an adaptive directed social network.
//!
//! Two firms of `n` individuals carry cultural vectors. Each iteration every
//! individual picks an information source, accepts its culture with a
//! probability that decays with cultural distance, and strengthens or weakens
//! the tie it listened through accordingly.

mod init;
mod metrics;
mod state;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Scalar;

pub use init::init_population;
pub use metrics::{condition_label, metrics, MergerMetrics, CSV_HEADER};
pub use state::{individual_action, iterate, run, run_final, run_recording, Individual, MergerRun, MergerState};

/// Strength given to a tie created by incidental contact.
pub const INCIDENTAL_STRENGTH: f64 = 0.01;
/// Ties weaker than this are removed.
pub const REMOVAL_THRESHOLD: f64 = 0.01;
/// Probability that the source is drawn from the focal's in-neighbours.
pub const LOCAL_SOURCE_PROB: f64 = 0.99;
/// Initial strengths are uniform on this closed interval.
pub const INITIAL_STRENGTH_RANGE: (f64, f64) = (0.01, 0.99);
/// Closeness below this is raised to it before exponentiation by `b`.
pub const CLOSENESS_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MergerError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("could only place {placed} of {wanted} {kind} ties")]
    TieQuota { kind: &'static str, placed: usize, wanted: usize },
    #[error("cultural distance must be non-negative, got {0}")]
    NegativeDistance(f64),
    #[error("tie strength must lie strictly inside (0, 1), got {0}")]
    StrengthOutOfRange(f64),
    #[error("snapshot: {0}")]
    Snapshot(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Firm {
    A,
    B,
}

impl Firm {
    pub fn name(self) -> &'static str {
        match self {
            Firm::A => "A",
            Firm::B => "B",
        }
    }
}

/// Model and sweep parameters. Defaults reproduce the reference setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MergerParams<F> {
    /// Individuals per firm.
    pub n: usize,
    /// Directed ties inside each firm.
    pub within_ties: usize,
    /// Directed ties from each firm to the other.
    pub between_ties: usize,
    /// Distance between the two firm centres.
    pub separation: F,
    /// Per-component standard deviation around the firm centre.
    pub noise_sd: F,
    /// Distance at which acceptance is one half.
    pub d_c: F,
    /// Within-firm concentration exponent.
    pub w: F,
    /// Between-firm concentration exponent.
    pub b: F,
    pub iterations: usize,
    pub runs: usize,
    pub dimension: usize,
    /// Shuffle the action order each iteration instead of ascending id.
    pub shuffle: bool,
}

impl<F: Scalar> Default for MergerParams<F> {
    fn default() -> Self {
        MergerParams {
            n: 50,
            within_ties: 490,
            between_ties: 50,
            separation: F::lit(3.0),
            noise_sd: F::lit(0.1),
            d_c: F::lit(0.5),
            w: F::zero(),
            b: F::zero(),
            iterations: 200,
            runs: 50,
            dimension: 10,
            shuffle: false,
        }
    }
}

impl<F: Scalar> MergerParams<F> {
    pub fn with_concentration(w: F, b: F) -> Self {
        MergerParams { w, b, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), MergerError> {
        let bad = |m: String| Err(MergerError::InvalidParams(m));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.dimension == 0 {
            return bad("dimension must be positive".into());
        }
        let finite_nonneg = |x: F| x.is_finite() && x >= F::zero();
        for (name, x) in [("separation", self.separation), ("noise_sd", self.noise_sd), ("w", self.w), ("b", self.b)] {
            if !finite_nonneg(x) {
                return bad(format!("{name} must be finite and non-negative, got {x}"));
            }
        }
        if !(self.d_c > F::zero()) || self.d_c.is_nan() {
            return bad(format!("d_c must be positive, got {}", self.d_c));
        }
        if self.within_ties == 0 || self.between_ties == 0 {
            return bad("tie counts must be positive".into());
        }
        if self.runs == 0 {
            return bad("runs must be positive".into());
        }
        Ok(())
    }

    /// Directed within-firm density `within / (n (n-1))`.
    pub fn within_density(&self) -> F {
        F::from_count(self.within_ties) / F::from_count(self.n * (self.n - 1))
    }
}

/// `(1/2)^(d / d_c)`.
pub fn acceptance_probability<F: Scalar>(d: F, d_c: F) -> Result<F, MergerError> {
    if d < F::zero() || d.is_nan() {
        return Err(MergerError::NegativeDistance(d.to_f64_lossy()));
    }
    if !(d_c > F::zero()) {
        return Err(MergerError::InvalidParams(format!("d_c must be positive, got {d_c}")));
    }
    Ok(F::lit(0.5).powf(d / d_c))
}

pub fn logit<F: Scalar>(s: F) -> F {
    (s / (F::one() - s)).ln()
}

pub fn logistic<F: Scalar>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// One unit up (accepted) or down (rejected) in logit space.
pub fn update_tie<F: Scalar>(s: F, accepted: bool) -> Result<F, MergerError> {
    if !(s > F::zero() && s < F::one()) {
        return Err(MergerError::StrengthOutOfRange(s.to_f64_lossy()));
    }
    let step = if accepted { F::one() } else { -F::one() };
    Ok(logistic(logit(s) + step))
}

pub fn euclidean<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y)).sqrt()
}
