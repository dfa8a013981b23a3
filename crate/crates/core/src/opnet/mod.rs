//! Event-driven formation of operational networks over a standby network
//! of heterogeneous agents.

mod metrics;
pub mod predicate;
mod scenario;
mod sim;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use metrics::{entropy_of_counts, network_entropy, OpMetrics, Sphere, METRICS_HEADER};
pub use predicate::{Expr, Scope};
pub use scenario::{
    Condition, OpAgent, OpEvent, RandomScenario, Scenario, DEFAULT_HETEROTYPE_PREFIX, DEFAULT_MAX_TICKS, SAR_DEMO,
};
pub use sim::{audit_causality, run_to_quiescence, OpState, Phase, RunOutcome, TickSummary, Transfer};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpNetError {
    #[error("scenario line {line}, column {col}: {msg}")]
    Scenario { line: usize, col: usize, msg: String },
    #[error("agent list is empty")]
    EmptyAgents,
    #[error("agent `{0}` is not in the operational network")]
    NotInNetwork(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("causality violation: {0}")]
    Causality(String),
}

/// Agent classes by specialisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentClass {
    Sensor,
    Router,
    Actor,
    Database,
    Controller,
}

impl AgentClass {
    pub const ALL: [AgentClass; 5] =
        [AgentClass::Sensor, AgentClass::Router, AgentClass::Actor, AgentClass::Database, AgentClass::Controller];

    pub fn name(self) -> &'static str {
        match self {
            AgentClass::Sensor => "sensor",
            AgentClass::Router => "router",
            AgentClass::Actor => "actor",
            AgentClass::Database => "database",
            AgentClass::Controller => "controller",
        }
    }

    pub fn from_name(s: &str) -> Option<AgentClass> {
        AgentClass::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkType {
    /// Destination's listed variables are copied to the source on completion.
    Request,
    /// Source's listed variables are copied to the destination.
    Flow,
    /// Destination becomes tasked.
    Task,
}

impl LinkType {
    pub fn name(self) -> &'static str {
        match self {
            LinkType::Request => "request",
            LinkType::Flow => "flow",
            LinkType::Task => "task",
        }
    }

    pub fn from_name(s: &str) -> Option<LinkType> {
        [LinkType::Request, LinkType::Flow, LinkType::Task].into_iter().find(|t| t.name().eq_ignore_ascii_case(s))
    }
}

/// A knowledge value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Num(f64),
    Str(String),
}

impl Value {
    /// `true`/`false`, a finite number, or a string (optionally quoted).
    pub fn parse_literal(s: &str) -> Value {
        let s = s.trim();
        match s {
            "true" => return Value::Bool(true),
            "false" => return Value::Bool(false),
            _ => {}
        }
        if let Ok(x) = s.parse::<f64>() {
            if x.is_finite() {
                return Value::Num(x);
            }
        }
        let unquoted = s.strip_prefix('"').and_then(|r| r.strip_suffix('"')).unwrap_or(s);
        Value::Str(unquoted.to_string())
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            Value::Num(x) => *x != 0.0,
            Value::Str(s) => !s.is_empty(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(x) => write!(f, "{x}"),
            Value::Str(s) => {
                if Value::parse_literal(s) == Value::Str(s.clone()) && !s.contains(['"', ';', '|']) && s.trim() == s {
                    write!(f, "{s}")
                } else {
                    write!(f, "\"{s}\"")
                }
            }
        }
    }
}

/// Name of the predicate variable that reads the tasked flag.
pub const TASKED: &str = "tasked";

#[cfg(test)]
mod tests;
