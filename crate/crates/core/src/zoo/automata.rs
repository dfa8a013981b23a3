//! Asynchronous cellular automata and random Boolean networks as GNA.

use rand::{Rng, RngCore};

use super::rules::{boolean_state, BooleanRule, MajorityRule};
use super::{GnaModel, ZooError};
use crate::gna::{Context, GnaConfig, LinkState, NodeId, NodeSelection, NodeState, SelectionFamily};

/// Initial cell states of a cellular automaton.
#[derive(Debug, Clone, PartialEq)]
pub enum CaInit {
    Constant(u64),
    /// Each cell is 1 with probability `density`.
    Random {
        density: f64,
    },
    /// Row-major states, `width * height` entries.
    Explicit(Vec<u64>),
}

/// Cell id of `(x, y)` on a `width`-wide grid.
pub fn cell_id(width: usize, x: usize, y: usize) -> NodeId {
    NodeId((y * width + x) as u64)
}

/// Two-state majority automaton on a `width x height` torus with the von
/// Neumann neighbourhood. Links are symmetric; each step updates one
/// uniformly chosen cell to the strict majority of its four neighbours.
pub fn async_ca(width: usize, height: usize, init: CaInit, rng: &mut dyn RngCore) -> Result<GnaModel, ZooError> {
    if width < 3 || height < 3 {
        return Err(ZooError::Param(format!("torus {width}x{height} is too small; both sides must be >= 3")));
    }
    let n = width * height;
    let states: Vec<u64> = match init {
        CaInit::Constant(s) => vec![s; n],
        CaInit::Random { density } => {
            if !(0.0..=1.0).contains(&density) {
                return Err(ZooError::Param(format!("density = {density} is not a probability")));
            }
            (0..n).map(|_| (rng.random::<f64>() < density) as u64).collect()
        }
        CaInit::Explicit(v) => {
            if v.len() != n {
                return Err(ZooError::Param(format!("expected {n} cell states, got {}", v.len())));
            }
            v
        }
    };
    if let Some(s) = states.iter().find(|&&s| s > 1) {
        return Err(ZooError::Param(format!("cell state {s} is not binary")));
    }
    let mut c = GnaConfig::with_alphabet([NodeState(0), NodeState(1)]);
    for s in &states {
        c.add_node(NodeState(*s)).unwrap();
    }
    for y in 0..height {
        for x in 0..width {
            let me = cell_id(width, x, y);
            let right = cell_id(width, (x + 1) % width, y);
            let down = cell_id(width, x, (y + 1) % height);
            c.add_edge(me, right, LinkState::PRESENT).unwrap();
            c.add_edge(me, down, LinkState::PRESENT).unwrap();
        }
    }
    c.set_undirected(true).expect("torus links are symmetric");
    Ok(GnaModel {
        name: "ca".into(),
        extraction: Box::new(NodeSelection::new(SelectionFamily::Uniform, 1).with_context(Context::InNeighbors)),
        replacement: Box::new(MajorityRule),
        initial: c,
    })
}

/// Explicit wiring of a Boolean network: `inputs[i]` lists the input nodes
/// of node `i` by input position, `tables[i]` is its truth table.
#[derive(Debug, Clone, PartialEq)]
pub struct RbnParts {
    pub inputs: Vec<Vec<usize>>,
    pub tables: Vec<u64>,
    pub outputs: Vec<bool>,
}

/// Largest supported in-degree; truth tables must fit the state word.
pub const MAX_RBN_K: usize = 5;

pub fn rbn_from_parts(parts: &RbnParts) -> Result<GnaModel, ZooError> {
    let n = parts.inputs.len();
    if parts.tables.len() != n || parts.outputs.len() != n {
        return Err(ZooError::Param("inputs, tables and outputs must have equal length".into()));
    }
    let mut c = GnaConfig::new();
    for i in 0..n {
        let k = parts.inputs[i].len();
        if k > MAX_RBN_K {
            return Err(ZooError::Param(format!("node {i} has {k} inputs; at most {MAX_RBN_K} are supported")));
        }
        if k < 6 && parts.tables[i] >> (1u64 << k) != 0 {
            return Err(ZooError::Param(format!("truth table of node {i} has bits beyond 2^{k} entries")));
        }
        c.add_node(boolean_state(parts.tables[i], parts.outputs[i])).unwrap();
    }
    for (i, ins) in parts.inputs.iter().enumerate() {
        for (pos, &j) in ins.iter().enumerate() {
            if j >= n {
                return Err(ZooError::Param(format!("input {j} of node {i} is out of range")));
            }
            c.add_link(NodeId(j as u64), NodeId(i as u64), LinkState(pos as u32)).unwrap();
        }
    }
    Ok(GnaModel {
        name: "rbn".into(),
        extraction: Box::new(NodeSelection::new(SelectionFamily::Uniform, 1).with_context(Context::InNeighbors)),
        replacement: Box::new(BooleanRule),
        initial: c,
    })
}

/// Random Boolean network with `n` nodes, `k` distinct random inputs per
/// node, uniformly random truth tables and initial outputs.
pub fn async_rbn(n: usize, k: usize, rng: &mut dyn RngCore) -> Result<GnaModel, ZooError> {
    if k > MAX_RBN_K {
        return Err(ZooError::Param(format!("k = {k} exceeds the supported maximum {MAX_RBN_K}")));
    }
    if n == 0 || k >= n {
        return Err(ZooError::Param(format!("need k < n, got n = {n}, k = {k}")));
    }
    let mut inputs = Vec::with_capacity(n);
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let mut chosen = Vec::with_capacity(k);
        for _ in 0..k {
            chosen.push(others.swap_remove(rng.random_range(0..others.len())));
        }
        inputs.push(chosen);
    }
    let entries = 1u64 << k;
    let mask = if entries == 64 { u64::MAX } else { (1u64 << entries) - 1 };
    let tables = (0..n).map(|_| rng.next_u64() & mask).collect();
    let outputs = (0..n).map(|_| rng.random::<bool>()).collect();
    rbn_from_parts(&RbnParts { inputs, tables, outputs })
}
