//! Reference models expressed as ⟨E, R, I⟩ triplets.
//!
//! Every model here is run by [`crate::gna::run`]; none has a private loop.

mod automata;
mod growth;
pub mod rules;

pub use rules::NewcomerState;

use std::collections::BTreeMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gna::{self, Extraction, GnaConfig, GnaError, Replacement, Trajectory};

pub use automata::{async_ca, async_rbn, cell_id, rbn_from_parts, CaInit, RbnParts, MAX_RBN_K};
pub use growth::{
    ba_growth, birth_death, degree_state_growth, forest_fire_growth, state_based_growth, uniform_growth,
    DegreeStateParams, ForestFireSelection, StateBasedParams, StateBasedSelection, BLUE, RED,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZooError {
    #[error("parameter error: {0}")]
    Param(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error(transparent)]
    Gna(#[from] GnaError),
}

/// A runnable triplet.
pub struct GnaModel {
    pub name: String,
    pub extraction: Box<dyn Extraction>,
    pub replacement: Box<dyn Replacement>,
    pub initial: GnaConfig,
}

impl std::fmt::Debug for GnaModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GnaModel")
            .field("name", &self.name)
            .field("extraction", &self.extraction.info())
            .field("replacement", &self.replacement.info())
            .field("initial_nodes", &self.initial.node_count())
            .finish()
    }
}

impl GnaModel {
    pub fn run(&self, steps: usize, rng: &mut dyn RngCore) -> Result<Trajectory, GnaError> {
        let mut t = gna::run(&self.initial, self.extraction.as_ref(), self.replacement.as_ref(), steps, rng)?;
        t.meta.insert("model".into(), self.name.clone());
        Ok(t)
    }
}

/// Names accepted by [`ModelSpec::build`].
pub const MODEL_NAMES: [&str; 8] =
    ["ba", "uniform-growth", "degree-state", "state-based", "forest-fire", "ca", "rbn", "birth-death"];

/// Declarative model description, e.g. from a TOML file:
///
/// ```toml
/// model = "ba"
/// [params]
/// n_final = 1000
/// links_per_node = 1
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub model: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// Parameter reader that rejects keys outside the model's schema.
struct Params<'a> {
    model: &'a str,
    map: &'a BTreeMap<String, f64>,
}

impl<'a> Params<'a> {
    fn check(model: &'a str, map: &'a BTreeMap<String, f64>, allowed: &[&str]) -> Result<Self, ZooError> {
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ZooError::Param(format!(
                "unknown parameter `{k}` for model `{model}` (expected one of: {})",
                allowed.join(", ")
            )));
        }
        Ok(Params { model, map })
    }

    fn real(&self, key: &str, default: f64) -> Result<f64, ZooError> {
        let v = self.map.get(key).copied().unwrap_or(default);
        if !v.is_finite() {
            return Err(ZooError::Param(format!("`{key}` of model `{}` must be finite", self.model)));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, ZooError> {
        let v = self.real(key, default as f64)?;
        if v < 0.0 || v.fract() != 0.0 || v > 1e12 {
            return Err(ZooError::Param(format!("`{key}` of model `{}` must be a non-negative integer", self.model)));
        }
        Ok(v as usize)
    }
}

impl ModelSpec {
    pub fn new(model: impl Into<String>) -> Self {
        ModelSpec { model: model.into(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    /// Validates the parameters and instantiates the model. `rng` is used
    /// only by builders with random initial conditions (CA, RBN).
    pub fn build(&self, rng: &mut dyn RngCore) -> Result<GnaModel, ZooError> {
        let m = self.model.as_str();
        let map = &self.params;
        match m {
            "ba" | "uniform-growth" => {
                let p = Params::check(m, map, &["n_final", "links_per_node"])?;
                let (n, k) = (p.count("n_final", 1000)?, p.count("links_per_node", 1)?);
                if m == "ba" {
                    ba_growth(n, k)
                } else {
                    uniform_growth(n, k)
                }
            }
            "degree-state" => {
                let p = Params::check(m, map, &["n_final", "modulation", "red_prob", "adopt_prob"])?;
                let d = DegreeStateParams::default();
                degree_state_growth(&DegreeStateParams {
                    n_final: p.count("n_final", d.n_final)?,
                    modulation: p.real("modulation", d.modulation)?,
                    red_prob: p.real("red_prob", d.red_prob)?,
                    adopt_prob: p.real("adopt_prob", d.adopt_prob)?,
                })
            }
            "state-based" => {
                let p = Params::check(m, map, &["initial_nodes", "newcomer_rate", "red_prob"])?;
                let d = StateBasedParams::default();
                state_based_growth(&StateBasedParams {
                    initial_nodes: p.count("initial_nodes", d.initial_nodes)?,
                    newcomer_rate: p.real("newcomer_rate", d.newcomer_rate)?,
                    red_prob: p.real("red_prob", d.red_prob)?,
                })
            }
            "forest-fire" => {
                let p = Params::check(m, map, &["n_final", "burn_prob"])?;
                forest_fire_growth(p.count("n_final", 1000)?, p.real("burn_prob", 0.35)?)
            }
            "ca" => {
                let p = Params::check(m, map, &["width", "height", "density"])?;
                let init = CaInit::Random { density: p.real("density", 0.5)? };
                async_ca(p.count("width", 100)?, p.count("height", 100)?, init, rng)
            }
            "rbn" => {
                let p = Params::check(m, map, &["n", "k"])?;
                async_rbn(p.count("n", 30)?, p.count("k", 2)?, rng)
            }
            "birth-death" => {
                let p = Params::check(m, map, &["initial_nodes", "delete_prob"])?;
                birth_death(p.count("initial_nodes", 10)?, p.real("delete_prob", 0.3)?)
            }
            other => Err(ZooError::UnknownModel(other.into())),
        }
    }
}
