//! Generative network automata: configurations, sub-networks, rewriting
//! events and the asynchronous rewriting engine.

mod config;
mod engine;
mod mechanism;
mod sub;

use thiserror::Error;

pub use config::{GnaConfig, Link, LinkState, NodeId, NodeState};
pub use engine::{changed_nodes, embed, embed_in_place, extract, replace, run, step, step_in_place, Trajectory};
pub use mechanism::{
    extraction_by_name, seeded_sub, weighted_draws, Context, EmptySelection, Extraction, MechanismInfo, MechanismKind,
    Mode, NodeSelection, Replacement, SeedCount, Selected, SelectionFamily,
};
pub use sub::{Bridge, BridgeDir, RewriteEvent, SubGna};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GnaError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} already exists")]
    DuplicateNode(NodeId),
    #[error("node id {0} was allocated before and cannot be reused")]
    ReusedId(NodeId),
    #[error("link {src}->{dst} points outside the node set")]
    DanglingLink { src: NodeId, dst: NodeId },
    #[error("state {} of node {node} is not in the alphabet", state.0)]
    StateNotInAlphabet { node: NodeId, state: NodeState },
    #[error("undirected configuration is not symmetric at node {0}")]
    Asymmetric(NodeId),
    #[error("unknown selection family `{0}`")]
    UnknownFamily(String),
    #[error("selection family `{0}` is registered but not implemented")]
    UnsupportedFamily(String),
    #[error("extraction `{family}` requires state {} absent from the alphabet", state.0)]
    Schema { family: String, state: NodeState },
    #[error("replacement `{0}` has no rule for the extracted sub-network")]
    ReplacementMiss(String),
    #[error("stale event: {0}")]
    StaleEvent(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("configuration error: {0}")]
    Config(String),
}

#[cfg(test)]
mod tests;
