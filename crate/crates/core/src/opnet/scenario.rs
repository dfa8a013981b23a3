//! Scenario files.
//!
//! ```text
//! [settings]
//! heterotype_prefix = 3
//! max_ticks = 10000
//!
//! [agents]
//! # name | sigma (comma separated, class first) | knowledge (k=v; ...)
//! jrcc | controller, cognitive, joint, dnd | -
//! elt  | sensor, air, air, civil | distress=true; pob=4
//!
//! [standby]
//! # a | b
//! jrcc | elt
//!
//! [events]
//! # conditions | source | destination | type | required | transferred | duration | variation
//! - | elt | jrcc | flow | - | distress, pob | 2 | 0
//! ```
//!
//! Fields are separated by `|`; `-` marks an empty optional field. Several
//! conditions are separated by `;` and must all hold. Lines whose first
//! non-blank character is `#` are comments. Standby links are undirected.
//! A field separator is a single `|`; `||` inside a condition is the
//! boolean operator.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore};

use super::predicate::Expr;
use super::{AgentClass, LinkType, OpNetError, Value, TASKED};

pub const DEFAULT_HETEROTYPE_PREFIX: usize = 3;
pub const DEFAULT_MAX_TICKS: u64 = 10_000;

/// Synthetic search-and-rescue scenario shipped with the crate.
pub const SAR_DEMO: &str = include_str!("../../scenarios/sar-demo.opnet");

#[derive(Debug, Clone, PartialEq)]
pub struct OpAgent {
    pub name: String,
    /// Attribute string; the first entry is the class.
    pub sigma: Vec<String>,
    pub class: AgentClass,
    pub knowledge: BTreeMap<String, Value>,
}

impl OpAgent {
    /// Heterotype key: the first `prefix` attributes joined by `/`.
    pub fn heterotype(&self, prefix: usize) -> String {
        self.sigma[..prefix.min(self.sigma.len())].join("/")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub text: String,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpEvent {
    pub conditions: Vec<Condition>,
    pub source: usize,
    pub destination: usize,
    pub link_type: LinkType,
    pub required: Vec<String>,
    pub transferred: Vec<String>,
    /// Time units, at least 1.
    pub duration: u32,
    pub variation: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub agents: Vec<OpAgent>,
    pub standby: Vec<(usize, usize)>,
    pub events: Vec<OpEvent>,
    pub heterotype_prefix: usize,
    pub max_ticks: u64,
    index: BTreeMap<String, usize>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            agents: Vec::new(),
            standby: Vec::new(),
            events: Vec::new(),
            heterotype_prefix: DEFAULT_HETEROTYPE_PREFIX,
            max_ticks: DEFAULT_MAX_TICKS,
            index: BTreeMap::new(),
        }
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-')
}

fn valid_var(s: &str) -> bool {
    s.starts_with(|c: char| c.is_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_alphanumeric() || c == '_')
        && s != TASKED
}

/// Error builder bound to a line.
struct At {
    line: usize,
}

impl At {
    fn err(&self, col: usize, msg: impl Into<String>) -> OpNetError {
        OpNetError::Scenario { line: self.line, col, msg: msg.into() }
    }
}

/// `|`-separated fields with the 1-based column of their first character.
/// `||` is the predicate operator, not a separator.
fn fields(line: &str) -> Vec<(&str, usize)> {
    let bytes = line.as_bytes();
    let mut cuts = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'|' {
            if bytes.get(i + 1) == Some(&b'|') {
                i += 2;
                continue;
            }
            cuts.push(i);
        }
        i += 1;
    }
    let mut out = Vec::new();
    let mut start = 0;
    for end in cuts.into_iter().chain([line.len()]) {
        let piece = &line[start..end];
        let lead = piece.len() - piece.trim_start().len();
        out.push((piece.trim(), line[..start + lead].chars().count() + 1));
        start = end + 1;
    }
    out
}

fn list(s: &str) -> Vec<String> {
    if s == "-" || s.is_empty() {
        return Vec::new();
    }
    s.split(',').map(|x| x.trim().to_string()).collect()
}

impl Scenario {
    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn add_agent(
        &mut self,
        name: &str,
        sigma: Vec<String>,
        knowledge: BTreeMap<String, Value>,
    ) -> Result<usize, OpNetError> {
        let bad = |msg: String| OpNetError::Scenario { line: 0, col: 0, msg };
        if !valid_name(name) {
            return Err(bad(format!("invalid agent name `{name}`")));
        }
        if self.index.contains_key(name) {
            return Err(bad(format!("duplicate agent `{name}`")));
        }
        let class = sigma.first().and_then(|c| AgentClass::from_name(c)).ok_or_else(|| {
            bad(format!("agent `{name}`: first attribute must be one of sensor, router, actor, database, controller"))
        })?;
        let mut sigma = sigma;
        sigma[0] = class.name().to_string();
        if let Some(k) = knowledge.keys().find(|k| !valid_var(k)) {
            return Err(bad(format!("agent `{name}`: invalid variable name `{k}`")));
        }
        let i = self.agents.len();
        self.agents.push(OpAgent { name: name.into(), sigma, class, knowledge });
        self.index.insert(name.into(), i);
        Ok(i)
    }

    pub fn add_event(&mut self, ev: OpEvent) -> Result<(), OpNetError> {
        let bad = |msg: String| OpNetError::Scenario { line: 0, col: 0, msg };
        let n = self.agents.len();
        if ev.source >= n || ev.destination >= n {
            return Err(bad("event references an unknown agent".into()));
        }
        if ev.source == ev.destination {
            return Err(bad(format!("event links agent `{}` to itself", self.agents[ev.source].name)));
        }
        if ev.duration < 1 {
            return Err(bad("duration must be at least 1".into()));
        }
        if ev.link_type == LinkType::Task && !ev.transferred.is_empty() {
            return Err(bad("task events transfer no knowledge".into()));
        }
        if let Some(v) = ev.required.iter().chain(&ev.transferred).find(|v| !valid_var(v)) {
            return Err(bad(format!("invalid variable name `{v}`")));
        }
        self.events.push(ev);
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Scenario, OpNetError> {
        let mut sc = Scenario::default();
        let mut section = "";
        let mut pending_standby = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let at = At { line: i + 1 };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let relocate = |e: OpNetError, col: usize| match e {
                OpNetError::Scenario { msg, .. } => at.err(col, msg),
                other => other,
            };
            if let Some(name) = trimmed.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                section = match name {
                    "settings" | "agents" | "standby" | "events" => name,
                    _ => return Err(at.err(raw.find('[').unwrap() + 1, format!("unknown section `{name}`"))),
                };
                continue;
            }
            let f = fields(raw);
            match section {
                "settings" => {
                    let (k, v) = trimmed.split_once('=').ok_or_else(|| at.err(f[0].1, "expected key = value"))?;
                    let vcol = raw.find('=').unwrap() + 2;
                    let v: u64 = v
                        .trim()
                        .parse()
                        .map_err(|_| at.err(vcol, format!("`{}` is not a non-negative integer", v.trim())))?;
                    match k.trim() {
                        "heterotype_prefix" if v >= 1 => sc.heterotype_prefix = v as usize,
                        "heterotype_prefix" => return Err(at.err(vcol, "heterotype_prefix must be at least 1")),
                        "max_ticks" => sc.max_ticks = v,
                        other => return Err(at.err(f[0].1, format!("unknown setting `{other}`"))),
                    }
                }
                "agents" => {
                    if f.len() != 3 {
                        return Err(at.err(1, format!("agent rows have 3 fields, found {}", f.len())));
                    }
                    let sigma = list(f[1].0);
                    if sigma.is_empty() || sigma.iter().any(|s| s.is_empty() || s.contains('/')) {
                        return Err(at.err(f[1].1, "sigma needs non-empty attributes without `/`"));
                    }
                    let mut knowledge = BTreeMap::new();
                    if f[2].0 != "-" && !f[2].0.is_empty() {
                        for item in f[2].0.split(';') {
                            let (k, v) = item.split_once('=').ok_or_else(|| {
                                at.err(f[2].1, format!("knowledge item `{}` must be name=value", item.trim()))
                            })?;
                            if knowledge.insert(k.trim().to_string(), Value::parse_literal(v)).is_some() {
                                return Err(at.err(f[2].1, format!("variable `{}` given twice", k.trim())));
                            }
                        }
                    }
                    let col = match () {
                        _ if AgentClass::from_name(&sigma[0]).is_none() => f[1].1,
                        _ if knowledge.keys().any(|k| !valid_var(k)) => f[2].1,
                        _ => f[0].1,
                    };
                    sc.add_agent(f[0].0, sigma, knowledge).map_err(|e| relocate(e, col))?;
                }
                "standby" => {
                    if f.len() != 2 {
                        return Err(at.err(1, format!("standby rows have 2 fields, found {}", f.len())));
                    }
                    pending_standby.push((at.line, f[0], f[1]));
                }
                "events" => sc.parse_event(&at, &f)?,
                _ => return Err(at.err(1, "content before the first section")),
            }
        }
        for (line, a, b) in pending_standby {
            let at = At { line };
            let ia = sc.agent_index(a.0).ok_or_else(|| at.err(a.1, format!("unknown agent `{}`", a.0)))?;
            let ib = sc.agent_index(b.0).ok_or_else(|| at.err(b.1, format!("unknown agent `{}`", b.0)))?;
            sc.standby.push((ia.min(ib), ia.max(ib)));
        }
        sc.standby.sort_unstable();
        sc.standby.dedup();
        Ok(sc)
    }

    fn parse_event(&mut self, at: &At, f: &[(&str, usize)]) -> Result<(), OpNetError> {
        if f.len() != 8 {
            return Err(at.err(1, format!("event rows have 8 fields, found {}", f.len())));
        }
        let mut conditions = Vec::new();
        if f[0].0 != "-" && !f[0].0.is_empty() {
            let mut offset = 0;
            for part in f[0].0.split(';') {
                let lead = part.len() - part.trim_start().len();
                let col = f[0].1 + f[0].0[..offset + lead].chars().count();
                let text = part.trim();
                let expr = Expr::parse(text).map_err(|e| at.err(col + e.col - 1, format!("condition: {}", e.msg)))?;
                conditions.push(Condition { text: text.to_string(), expr });
                offset += part.len() + 1;
            }
        }
        let agent = |(name, col): (&str, usize)| {
            self.agent_index(name).ok_or_else(|| at.err(col, format!("unknown agent `{name}`")))
        };
        let source = agent(f[1])?;
        let destination = agent(f[2])?;
        let link_type = LinkType::from_name(f[3].0)
            .ok_or_else(|| at.err(f[3].1, format!("link type must be request, flow or task, not `{}`", f[3].0)))?;
        let num = |(s, col): (&str, usize), what: &str| -> Result<u32, OpNetError> {
            s.parse().map_err(|_| at.err(col, format!("{what} `{s}` is not a non-negative integer")))
        };
        let ev = OpEvent {
            conditions,
            source,
            destination,
            link_type,
            required: list(f[4].0),
            transferred: list(f[5].0),
            duration: num(f[6], "duration")?,
            variation: num(f[7], "variation")?,
        };
        let col = match () {
            _ if ev.duration < 1 => f[6].1,
            _ if ev.source == ev.destination => f[2].1,
            _ if ev.link_type == LinkType::Task && !ev.transferred.is_empty() => f[5].1,
            _ if ev.required.iter().any(|v| !valid_var(v)) => f[4].1,
            _ => f[5].1,
        };
        self.add_event(ev).map_err(|e| match e {
            OpNetError::Scenario { msg, .. } => at.err(col, msg),
            other => other,
        })
    }

    /// Canonical text; [`Scenario::parse`] of the result equals `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "[settings]\nheterotype_prefix = {}\nmax_ticks = {}\n", self.heterotype_prefix, self.max_ticks)
            .unwrap();
        out.push_str("[agents]\n");
        for a in &self.agents {
            let k = if a.knowledge.is_empty() {
                "-".to_string()
            } else {
                a.knowledge.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join("; ")
            };
            writeln!(out, "{} | {} | {k}", a.name, a.sigma.join(", ")).unwrap();
        }
        if !self.standby.is_empty() {
            out.push_str("\n[standby]\n");
            for (a, b) in &self.standby {
                writeln!(out, "{} | {}", self.agents[*a].name, self.agents[*b].name).unwrap();
            }
        }
        out.push_str("\n[events]\n");
        let join = |v: &[String]| if v.is_empty() { "-".to_string() } else { v.join(", ") };
        for e in &self.events {
            let cond = if e.conditions.is_empty() {
                "-".to_string()
            } else {
                e.conditions.iter().map(|c| c.text.as_str()).collect::<Vec<_>>().join("; ")
            };
            writeln!(
                out,
                "{cond} | {} | {} | {} | {} | {} | {} | {}",
                self.agents[e.source].name,
                self.agents[e.destination].name,
                e.link_type.name(),
                join(&e.required),
                join(&e.transferred),
                e.duration,
                e.variation
            )
            .unwrap();
        }
        out
    }
}

/// Generator of random scenarios for structural testing.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomScenario {
    pub agents: usize,
    pub events: usize,
    pub variables: usize,
    pub max_duration: u32,
    pub max_variation: u32,
    /// Probability that an event carries a condition.
    pub condition_prob: f64,
}

impl Default for RandomScenario {
    fn default() -> Self {
        RandomScenario { agents: 12, events: 40, variables: 6, max_duration: 4, max_variation: 2, condition_prob: 0.3 }
    }
}

impl RandomScenario {
    pub fn generate(&self, rng: &mut dyn RngCore) -> Scenario {
        assert!(self.agents >= 2 && self.variables >= 1 && self.max_duration >= 1);
        const REALMS: [&str; 6] = ["maritime", "land", "air", "space", "cyber", "cognitive"];
        const DOMAINS: [&str; 4] = ["air", "maritime", "ground", "joint"];
        let var = |j: usize| format!("v{j}");
        let mut sc = Scenario::default();
        for i in 0..self.agents {
            let class = *AgentClass::ALL.choose(rng).unwrap();
            let sigma = vec![
                class.name().to_string(),
                REALMS.choose(rng).unwrap().to_string(),
                DOMAINS.choose(rng).unwrap().to_string(),
                format!("org{}", rng.random_range(0..3)),
            ];
            let mut knowledge = BTreeMap::new();
            for j in 0..self.variables {
                if i == 0 || rng.random_bool(0.15) {
                    knowledge.insert(var(j), Value::Num(rng.random_range(0..5) as f64));
                }
            }
            sc.add_agent(&format!("a{i}"), sigma, knowledge).unwrap();
        }
        for _ in 0..self.events {
            let source = rng.random_range(0..self.agents);
            let mut destination = rng.random_range(0..self.agents - 1);
            if destination >= source {
                destination += 1;
            }
            let link_type = [LinkType::Request, LinkType::Flow, LinkType::Task].choose(rng).copied().unwrap();
            let required = (0..rng.random_range(0..=2)).map(|_| var(rng.random_range(0..self.variables))).collect();
            let transferred = if link_type == LinkType::Task {
                Vec::new()
            } else {
                (0..rng.random_range(1..=2)).map(|_| var(rng.random_range(0..self.variables))).collect()
            };
            let mut conditions = Vec::new();
            if rng.random_bool(self.condition_prob) {
                let text = match rng.random_range(0..4) {
                    0 => format!("{} >= {}", var(rng.random_range(0..self.variables)), rng.random_range(0..5)),
                    1 => format!("dst.{} != 2", var(rng.random_range(0..self.variables))),
                    2 => format!("!dst.{TASKED} || {}", var(rng.random_range(0..self.variables))),
                    _ => TASKED.to_string(),
                };
                conditions.push(Condition { expr: Expr::parse(&text).unwrap(), text });
            }
            sc.add_event(OpEvent {
                conditions,
                source,
                destination,
                link_type,
                required,
                transferred,
                duration: rng.random_range(1..=self.max_duration),
                variation: rng.random_range(0..=self.max_variation),
            })
            .unwrap();
        }
        for _ in 0..self.agents {
            let a = rng.random_range(0..self.agents);
            let b = rng.random_range(0..self.agents);
            if a != b {
                sc.standby.push((a.min(b), a.max(b)));
            }
        }
        sc.standby.sort_unstable();
        sc.standby.dedup();
        sc
    }
}
