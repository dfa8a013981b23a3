use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::{escape, unescape, IoError, Lines, Token};
use crate::gna::{GnaConfig, LinkState, NodeId, NodeState};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub id: u64,
    pub label: String,
    pub attrs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkRecord {
    pub src: u64,
    pub dst: u64,
    pub label: String,
    pub weight: f64,
}

/// Serialisable network state: a GNA configuration or a simulator network.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub directed: bool,
    pub time: u64,
    /// Id watermark; every node id is below it.
    pub next_id: u64,
    pub alphabet: Option<Vec<String>>,
    pub nodes: Vec<NodeRecord>,
    pub links: Vec<LinkRecord>,
}

impl Default for Snapshot {
    fn default() -> Self {
        Snapshot { directed: true, time: 0, next_id: 0, alphabet: None, nodes: Vec::new(), links: Vec::new() }
    }
}

impl Snapshot {
    /// Sorts records into canonical order.
    pub fn canonicalize(&mut self) {
        self.nodes.sort_by_key(|a| a.id);
        self.links.sort_by(|a, b| {
            (a.src, a.dst, &a.label).cmp(&(b.src, b.dst, &b.label)).then(a.weight.total_cmp(&b.weight))
        });
        if let Some(a) = &mut self.alphabet {
            a.sort();
            a.dedup();
        }
    }

    /// Checks id uniqueness, the watermark and link endpoints.
    pub fn validate(&self) -> Result<(), IoError> {
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id) {
                return Err(IoError::Schema(format!("duplicate node id {}", n.id)));
            }
            if n.id >= self.next_id {
                return Err(IoError::Schema(format!("node id {} not below next-id {}", n.id, self.next_id)));
            }
        }
        for l in &self.links {
            if !ids.contains(&l.src) || !ids.contains(&l.dst) {
                return Err(IoError::Schema(format!("link {}->{} references a missing node", l.src, l.dst)));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = self.clone();
        s.canonicalize();
        let mut out = String::new();
        s.write_block(&mut out);
        out
    }

    pub(crate) fn write_block(&self, out: &mut String) {
        writeln!(out, "gnakit-snapshot {SNAPSHOT_VERSION}").unwrap();
        writeln!(out, "directed {}", u8::from(self.directed)).unwrap();
        writeln!(out, "time {}", self.time).unwrap();
        writeln!(out, "next-id {}", self.next_id).unwrap();
        if let Some(a) = &self.alphabet {
            out.push_str("alphabet");
            for s in a {
                write!(out, " {}", escape(s)).unwrap();
            }
            out.push('\n');
        }
        for n in &self.nodes {
            write!(out, "node {} {}", n.id, escape(&n.label)).unwrap();
            for (k, v) in &n.attrs {
                write!(out, " {}={}", escape(k), escape(v)).unwrap();
            }
            out.push('\n');
        }
        for l in &self.links {
            writeln!(out, "link {} {} {} {}", l.src, l.dst, escape(&l.label), l.weight).unwrap();
        }
        out.push_str("end\n");
    }

    pub fn parse(text: &str) -> Result<Snapshot, IoError> {
        let mut lines = Lines::new(text);
        let s = Snapshot::read_block(&mut lines)?;
        if let Some(toks) = lines.next_tokens() {
            return Err(lines.err(toks[0].col, "trailing content after `end`"));
        }
        Ok(s)
    }

    pub(crate) fn read_block(lines: &mut Lines<'_>) -> Result<Snapshot, IoError> {
        let (args, end) = lines.expect("gnakit-snapshot")?;
        lines.arity(&args, 1, end, "header")?;
        let v: u32 = lines.parse(args[0], "version")?;
        if v != SNAPSHOT_VERSION {
            return Err(lines.err(args[0].col, format!("unsupported snapshot version {v}")));
        }
        let mut s = Snapshot::default();
        let (args, end) = lines.expect("directed")?;
        lines.arity(&args, 1, end, "directed")?;
        s.directed = match args[0].text {
            "1" => true,
            "0" => false,
            _ => return Err(lines.err(args[0].col, "directed must be 0 or 1")),
        };
        let (args, end) = lines.expect("time")?;
        lines.arity(&args, 1, end, "time")?;
        s.time = lines.parse(args[0], "time")?;
        let (args, end) = lines.expect("next-id")?;
        lines.arity(&args, 1, end, "next-id")?;
        s.next_id = lines.parse(args[0], "next-id")?;
        let mut ids = BTreeSet::new();
        loop {
            let toks = lines.next_tokens().ok_or_else(|| lines.eof("`end`"))?;
            let (kw, args) = (toks[0], &toks[1..]);
            let end = kw.col + kw.text.len();
            match kw.text {
                "end" => {
                    lines.arity(args, 0, end, "end")?;
                    break;
                }
                "alphabet" if s.alphabet.is_none() && s.nodes.is_empty() && s.links.is_empty() => {
                    s.alphabet = Some(args.iter().map(|t| token(lines, *t)).collect::<Result<_, _>>()?);
                }
                "node" => {
                    if args.len() < 2 {
                        lines.arity(args, 2, end, "node")?;
                    }
                    let id: u64 = lines.parse(args[0], "node id")?;
                    if !ids.insert(id) {
                        return Err(lines.err(args[0].col, format!("duplicate node id {id}")));
                    }
                    if id >= s.next_id {
                        return Err(lines.err(args[0].col, format!("node id {id} not below next-id {}", s.next_id)));
                    }
                    let mut attrs = BTreeMap::new();
                    for t in &args[2..] {
                        let (k, v) =
                            t.text.split_once('=').ok_or_else(|| lines.err(t.col, "attribute must be key=value"))?;
                        let k = unescape(k).ok_or_else(|| lines.err(t.col, "bad escape in attribute key"))?;
                        let v = unescape(v).ok_or_else(|| lines.err(t.col, "bad escape in attribute value"))?;
                        if attrs.insert(k.clone(), v).is_some() {
                            return Err(lines.err(t.col, format!("duplicate attribute `{k}`")));
                        }
                    }
                    s.nodes.push(NodeRecord { id, label: token(lines, args[1])?, attrs });
                }
                "link" => {
                    lines.arity(args, 4, end, "link")?;
                    let src: u64 = lines.parse(args[0], "link source")?;
                    let dst: u64 = lines.parse(args[1], "link destination")?;
                    for (t, id) in [(args[0], src), (args[1], dst)] {
                        if !ids.contains(&id) {
                            return Err(lines.err(t.col, format!("link references undeclared node {id}")));
                        }
                    }
                    let weight: f64 = lines.parse(args[3], "link weight")?;
                    s.links.push(LinkRecord { src, dst, label: token(lines, args[2])?, weight });
                }
                other => return Err(lines.err(kw.col, format!("unexpected record `{other}`"))),
            }
        }
        s.canonicalize();
        Ok(s)
    }

    pub fn from_config(c: &GnaConfig) -> Snapshot {
        let mut s = Snapshot {
            directed: !c.is_undirected(),
            time: c.time(),
            next_id: c.next_id(),
            alphabet: c.alphabet().map(|a| a.iter().map(|x| x.0.to_string()).collect()),
            nodes: c
                .states()
                .map(|(id, st)| NodeRecord { id: id.0, label: st.0.to_string(), attrs: BTreeMap::new() })
                .collect(),
            links: c
                .links()
                .map(|(src, l)| LinkRecord { src: src.0, dst: l.dst.0, label: l.state.0.to_string(), weight: 1.0 })
                .collect(),
        };
        s.canonicalize();
        s
    }

    /// Converts to a GNA configuration. Labels must be integers and weights
    /// must be 1; attributes are not representable and are rejected.
    pub fn to_config(&self) -> Result<GnaConfig, IoError> {
        self.validate()?;
        let num = |what: &str, s: &str| -> Result<u64, IoError> {
            s.parse().map_err(|_| IoError::Schema(format!("{what} `{s}` is not an integer state")))
        };
        let mut c = GnaConfig::new();
        for n in &self.nodes {
            if !n.attrs.is_empty() {
                return Err(IoError::Schema(format!("node {} carries attributes", n.id)));
            }
            c.insert_node(NodeId(n.id), NodeState(num("node label", &n.label)?))?;
        }
        for l in &self.links {
            if l.weight != 1.0 {
                return Err(IoError::Schema(format!("link {}->{} has weight {}", l.src, l.dst, l.weight)));
            }
            let st = u32::try_from(num("link label", &l.label)?)
                .map_err(|_| IoError::Schema(format!("link state `{}` out of range", l.label)))?;
            c.add_link(NodeId(l.src), NodeId(l.dst), LinkState(st))?;
        }
        c.reserve_ids(self.next_id);
        c.set_time(self.time);
        if let Some(a) = &self.alphabet {
            let states = a.iter().map(|s| num("alphabet entry", s).map(NodeState)).collect::<Result<_, _>>()?;
            c.set_alphabet(Some(states))?;
        }
        c.set_undirected(!self.directed)?;
        Ok(c)
    }
}

fn token(lines: &Lines<'_>, t: Token<'_>) -> Result<String, IoError> {
    unescape(t.text).ok_or_else(|| lines.err(t.col, format!("bad escape in `{}`", t.text)))
}

/// Canonical text of a configuration.
pub fn config_to_text(c: &GnaConfig) -> String {
    Snapshot::from_config(c).to_text()
}

pub fn parse_config(text: &str) -> Result<GnaConfig, IoError> {
    Snapshot::parse(text)?.to_config()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labelled() -> GnaConfig {
        let mut c = GnaConfig::with_alphabet([NodeState(0), NodeState(1), NodeState(2)]);
        let a = c.add_node(NodeState(2)).unwrap();
        let b = c.add_node(NodeState(0)).unwrap();
        let d = c.add_node(NodeState(1)).unwrap();
        c.add_link(a, b, LinkState(0)).unwrap();
        c.add_link(b, d, LinkState(3)).unwrap();
        c.add_link(b, d, LinkState(3)).unwrap();
        c.add_link(d, a, LinkState(0)).unwrap();
        c.set_time(4);
        c
    }

    #[test]
    fn empty_round_trip() {
        let c = GnaConfig::new();
        let text = config_to_text(&c);
        assert_eq!(text, "gnakit-snapshot 1\ndirected 1\ntime 0\nnext-id 0\nend\n");
        assert_eq!(parse_config(&text).unwrap(), c);
    }

    #[test]
    fn labelled_digraph_round_trip() {
        let c = labelled();
        let text = config_to_text(&c);
        let back = parse_config(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(config_to_text(&back), text);
    }

    #[test]
    fn record_order_does_not_matter() {
        let text =
            "gnakit-snapshot 1\ndirected 1\ntime 0\nnext-id 5\nnode 3 0\nnode 1 1\nlink 3 1 0 1\nlink 1 3 0 1\nend\n";
        let s = Snapshot::parse(text).unwrap();
        assert_eq!(s.nodes[0].id, 1);
        assert_eq!(Snapshot::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn undirected_round_trip() {
        let mut c = GnaConfig::new();
        let a = c.add_node(NodeState(0)).unwrap();
        let b = c.add_node(NodeState(0)).unwrap();
        c.add_edge(a, b, LinkState::PRESENT).unwrap();
        c.set_undirected(true).unwrap();
        assert_eq!(parse_config(&config_to_text(&c)).unwrap(), c);
    }

    #[test]
    fn attributes_and_escapes() {
        let mut s = Snapshot { next_id: 1, ..Snapshot::default() };
        s.nodes.push(NodeRecord {
            id: 0,
            label: "search master".into(),
            attrs: BTreeMap::from([("org".into(), "JRCC Halifax".into()), ("k=v".into(), "".into())]),
        });
        let text = s.to_text();
        assert!(text.contains("node 0 search%20master k%3Dv=- org=JRCC%20Halifax"), "{text}");
        assert_eq!(Snapshot::parse(&text).unwrap(), s);
    }

    fn parse_err(text: &str) -> (usize, usize) {
        match Snapshot::parse(text) {
            Err(IoError::Parse { line, col, .. }) => (line, col),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn diagnostics_carry_positions() {
        let head = "gnakit-snapshot 1\ndirected 1\ntime 0\nnext-id 4\n";
        assert_eq!(parse_err(&format!("{head}node 0 0\nnode 0 1\nend\n")), (6, 6));
        assert_eq!(parse_err(&format!("{head}node 0 0\nlink 0 7 0 1\nend\n")), (6, 8));
        assert_eq!(parse_err(&format!("{head}node x 0\nend\n")), (5, 6));
        assert_eq!(parse_err(&format!("{head}node 0 0\n  bogus\nend\n")), (6, 3));
        assert_eq!(parse_err(&format!("{head}node 0 0\n")), (6, 1));
        assert_eq!(parse_err("gnakit-snapshot 2\n"), (1, 17));
        assert_eq!(parse_err(&format!("{head}node 9 0\nend\n")), (5, 6));
        assert_eq!(parse_err(&format!("{head}link 0 0 0\nend\n")), (5, 11));
    }

    #[test]
    fn non_integer_labels_are_schema_errors() {
        let text = "gnakit-snapshot 1\ndirected 1\ntime 0\nnext-id 1\nnode 0 red\nend\n";
        assert!(Snapshot::parse(text).is_ok());
        assert!(matches!(parse_config(text), Err(IoError::Schema(_))));
    }
}
