//! Inferring a GNA model from an observed trajectory.
//!
//! Pipeline: [`detect_event`] per step, [`build_training`] over the whole
//! trace, [`fit_extraction`] over the candidate families, a
//! [`ReplacementTable`] for the replacement, and
//! [`reconstruct_and_score`] to compare a simulation of the fitted model
//! with the reference.

mod canon;
mod detect;
mod likelihood;
mod report;
mod score;
mod table;
mod training;

use serde::Serialize;
use thiserror::Error;

use crate::gna::{Context, GnaConfig, GnaError, NodeSelection, SeedCount, Trajectory};

pub use canon::{canonical_form, canonical_key, CanonicalForm, CanonicalSubgraph, EXACT_LIMIT};
pub use detect::{change_regions, change_sets, detect_event, ChangeSets};
pub use likelihood::{
    fit_extraction, Candidate, CandidateFit, SelectionStats, LINE_TOL, MAX_SWEEPS, ORDER_SUM_LIMIT, PARAM_BOUNDS,
    TIE_TOL,
};
pub use report::{FitReport, ReportedCandidate};
pub use score::{
    bhattacharyya, bhattacharyya_slices, core_distribution, key_distribution, reconstruct_and_score,
    score_trajectories, Reconstruction, NORMALISATION_TOL,
};
pub use table::{EventTemplate, LookupMode, ReplacementTable, TableEntry, TemplateNode};
pub use training::{build_training, ReplacementTriple, SkippedStep, TrainingSets};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscoveryError {
    #[error("trace corruption: {0}")]
    TraceCorruption(String),
    #[error("not enough data: {0}")]
    NoData(String),
    #[error("distribution not normalised: {0}")]
    Normalisation(String),
    #[error(transparent)]
    Gna(#[from] GnaError),
}

/// A complete inferred model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedModel {
    pub candidates: Vec<CandidateFit>,
    pub winner: usize,
    /// Empirical distribution of core sizes, zero meaning creation.
    pub core_sizes: Vec<(usize, f64)>,
    pub table: ReplacementTable,
    #[serde(skip)]
    pub initial: GnaConfig,
}

impl FittedModel {
    pub fn best(&self) -> &CandidateFit {
        &self.candidates[self.winner]
    }

    /// The fitted extraction: a core size drawn from the empirical
    /// distribution, seeds drawn from the winning family, plus the seeds'
    /// in-neighbours.
    pub fn extraction(&self) -> NodeSelection {
        NodeSelection::new(self.best().family.clone(), 0)
            .with_count(SeedCount::Distribution(self.core_sizes.clone()))
            .with_context(Context::InNeighbors)
    }
}

/// Runs the whole inference on `traj`.
pub fn fit_model(traj: &Trajectory, candidates: &[Candidate], mode: LookupMode) -> Result<FittedModel, DiscoveryError> {
    let ts = build_training(traj)?;
    fit_from_training(&ts, traj.initial.clone(), candidates, mode)
}

pub fn fit_from_training(
    ts: &TrainingSets,
    initial: GnaConfig,
    candidates: &[Candidate],
    mode: LookupMode,
) -> Result<FittedModel, DiscoveryError> {
    let (fits, winner) = fit_extraction(&ts.pairs, candidates, &ts.states)?;
    let mut table = ReplacementTable::new(mode);
    for tr in &ts.triples {
        table.insert(tr.key.clone(), tr.template.clone());
    }
    Ok(FittedModel { candidates: fits, winner, core_sizes: ts.core_size_distribution(), table, initial })
}
