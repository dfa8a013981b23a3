//! Generative network automata and the simulators built on them.
//!
//! Numeric kernels (centralities, entropy, divergence, the merger model) are
//! generic over [`Scalar`]; the aliases below fix them to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discovery;
pub mod gna;
pub mod graph;
pub mod io;
pub mod merger;
pub mod num;
pub mod opnet;
pub mod optimize;
pub mod rng;
pub mod zoo;

use thiserror::Error;

pub use num::Scalar;

pub type MergerParams = merger::MergerParams<f64>;
pub type MergerState = merger::MergerState<f64>;
pub type MergerMetrics = merger::MergerMetrics<f64>;
pub type MergerRun = merger::MergerRun<f64>;

/// Any error raised by the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Gna(#[from] gna::GnaError),
    #[error(transparent)]
    Zoo(#[from] zoo::ZooError),
    #[error(transparent)]
    Discovery(#[from] discovery::DiscoveryError),
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error(transparent)]
    OpNet(#[from] opnet::OpNetError),
    #[error(transparent)]
    Merger(#[from] merger::MergerError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
