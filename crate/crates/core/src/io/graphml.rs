use std::collections::BTreeMap;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{IoError, LinkRecord, NodeRecord, Snapshot};
use crate::gna::GnaConfig;

#[derive(Debug, Clone)]
struct Key {
    name: String,
    default: Option<String>,
}

/// Imports a series of GraphML documents as snapshots with stable ids.
///
/// Node ids are allocated in first-seen order across every document passed
/// to the same importer, so a node keeps its id through the series and a
/// removed node's id is never handed out again. The node data key named
/// `state_key` (default `state`) becomes the node label; other node data
/// become attributes. Edge data named `state_key` become the link label
/// (default `0`). Undirected edges produce both arcs.
#[derive(Debug, Clone)]
pub struct GraphmlImporter {
    pub state_key: String,
    ids: BTreeMap<String, u64>,
    labels: BTreeMap<String, u64>,
    label_order: Vec<String>,
    time: u64,
}

impl Default for GraphmlImporter {
    fn default() -> Self {
        GraphmlImporter::new("state")
    }
}

fn attr(e: &BytesStart<'_>, name: &[u8]) -> Result<Option<String>, IoError> {
    for a in e.attributes() {
        let a = a.map_err(|err| IoError::Xml(err.to_string()))?;
        if a.key.as_ref() == name {
            return Ok(Some(a.unescape_value().map_err(|err| IoError::Xml(err.to_string()))?.into_owned()));
        }
    }
    Ok(None)
}

fn required(e: &BytesStart<'_>, name: &[u8], pos: u64) -> Result<String, IoError> {
    attr(e, name)?.ok_or_else(|| {
        IoError::Xml(format!(
            "<{}> at byte {pos} lacks `{}`",
            String::from_utf8_lossy(e.name().as_ref()),
            String::from_utf8_lossy(name)
        ))
    })
}

#[derive(Default)]
struct Element {
    id: String,
    target: Option<String>,
    directed: Option<bool>,
    data: BTreeMap<String, String>,
}

impl GraphmlImporter {
    pub fn new(state_key: &str) -> Self {
        GraphmlImporter {
            state_key: state_key.into(),
            ids: BTreeMap::new(),
            labels: BTreeMap::new(),
            label_order: Vec::new(),
            time: 0,
        }
    }

    /// Node-label to integer-state mapping used by [`Self::import_config`],
    /// in allocation order.
    pub fn label_order(&self) -> &[String] {
        &self.label_order
    }

    fn node_id(&mut self, name: &str) -> u64 {
        let next = self.ids.len() as u64;
        *self.ids.entry(name.to_string()).or_insert(next)
    }

    /// Parses one document into a snapshot whose time is its position in
    /// the series.
    pub fn import(&mut self, text: &str) -> Result<Snapshot, IoError> {
        let mut reader = Reader::from_str(text);
        reader.config_mut().trim_text(true);
        let mut node_keys: BTreeMap<String, Key> = BTreeMap::new();
        let mut edge_keys: BTreeMap<String, Key> = BTreeMap::new();
        let mut edge_default_directed = true;
        let mut nodes: Vec<Element> = Vec::new();
        let mut edges: Vec<Element> = Vec::new();
        let mut seen_graph = false;
        // element being filled: 0 none, 1 node, 2 edge, 3 key
        let mut open = 0u8;
        let mut current = Element::default();
        let mut current_key: Option<(String, String, Key)> = None;
        let mut data_key: Option<String> = None;
        let mut in_default = false;
        loop {
            let pos = reader.buffer_position();
            let ev = reader.read_event().map_err(|e| IoError::Xml(format!("at byte {pos}: {e}")))?;
            let (e, empty) = match &ev {
                Event::Start(e) => (Some(e.clone()), false),
                Event::Empty(e) => (Some(e.clone()), true),
                _ => (None, false),
            };
            if let Some(e) = e {
                match e.name().as_ref() {
                    b"graph" => {
                        if seen_graph {
                            return Err(IoError::Xml("only one <graph> per document is supported".into()));
                        }
                        seen_graph = true;
                        edge_default_directed = attr(&e, b"edgedefault")?.as_deref() != Some("undirected");
                    }
                    b"key" => {
                        let id = required(&e, b"id", pos)?;
                        let domain = attr(&e, b"for")?.unwrap_or_else(|| "all".into());
                        let name = attr(&e, b"attr.name")?.unwrap_or_else(|| id.clone());
                        let k = Key { name, default: None };
                        if empty {
                            register(&mut node_keys, &mut edge_keys, &domain, id, k);
                        } else {
                            current_key = Some((id, domain, k));
                            open = 3;
                        }
                    }
                    b"default" if open == 3 => in_default = true,
                    b"node" => {
                        current = Element { id: required(&e, b"id", pos)?, ..Element::default() };
                        if empty {
                            nodes.push(std::mem::take(&mut current));
                        } else {
                            open = 1;
                        }
                    }
                    b"edge" => {
                        let src = required(&e, b"source", pos)?;
                        current = Element {
                            id: src,
                            target: Some(required(&e, b"target", pos)?),
                            directed: attr(&e, b"directed")?.map(|d| d == "true"),
                            ..Element::default()
                        };
                        if empty {
                            edges.push(std::mem::take(&mut current));
                        } else {
                            open = 2;
                        }
                    }
                    b"data" if open == 1 || open == 2 => {
                        let k = required(&e, b"key", pos)?;
                        if empty {
                            current.data.insert(k, String::new());
                        } else {
                            data_key = Some(k);
                        }
                    }
                    _ => {}
                }
                continue;
            }
            match ev {
                Event::Text(t) => {
                    let v = t.unescape().map_err(|e| IoError::Xml(e.to_string()))?.into_owned();
                    if in_default {
                        if let Some((_, _, k)) = &mut current_key {
                            k.default = Some(v);
                        }
                    } else if let Some(k) = &data_key {
                        current.data.insert(k.clone(), v);
                    }
                }
                Event::End(e) => match e.name().as_ref() {
                    b"default" => in_default = false,
                    b"key" => {
                        if let Some((id, domain, k)) = current_key.take() {
                            register(&mut node_keys, &mut edge_keys, &domain, id, k);
                        }
                        open = 0;
                    }
                    b"data" => {
                        if let Some(k) = data_key.take() {
                            current.data.entry(k).or_default();
                        }
                    }
                    b"node" => {
                        nodes.push(std::mem::take(&mut current));
                        open = 0;
                    }
                    b"edge" => {
                        edges.push(std::mem::take(&mut current));
                        open = 0;
                    }
                    _ => {}
                },
                Event::Eof => break,
                _ => {}
            }
        }
        if !seen_graph {
            return Err(IoError::Xml("document has no <graph> element".into()));
        }

        let mut snap = Snapshot { directed: true, time: self.time, ..Snapshot::default() };
        let mut declared = BTreeMap::new();
        for n in nodes {
            let id = self.node_id(&n.id);
            if declared.insert(n.id.clone(), id).is_some() {
                return Err(IoError::Xml(format!("duplicate node id `{}`", n.id)));
            }
            let mut label = None;
            let mut attrs = BTreeMap::new();
            for (kid, k) in &node_keys {
                let v = n.data.get(kid).cloned().or_else(|| k.default.clone());
                if let Some(v) = v {
                    if k.name == self.state_key {
                        label = Some(v);
                    } else {
                        attrs.insert(k.name.clone(), v);
                    }
                }
            }
            for kid in n.data.keys() {
                if !node_keys.contains_key(kid) {
                    return Err(IoError::Xml(format!("node `{}` uses undeclared key `{kid}`", n.id)));
                }
            }
            attrs.insert("graphml_id".into(), n.id);
            snap.nodes.push(NodeRecord { id, label: label.unwrap_or_else(|| "0".into()), attrs });
        }
        let mut all_undirected = !edges.is_empty();
        for e in edges {
            let target = e.target.clone().unwrap_or_default();
            let lookup = |name: &str| {
                declared
                    .get(name)
                    .copied()
                    .ok_or_else(|| IoError::Xml(format!("edge references unknown node `{name}`")))
            };
            let (src, dst) = (lookup(&e.id)?, lookup(&target)?);
            let mut label = "0".to_string();
            for (kid, k) in &edge_keys {
                if k.name == self.state_key {
                    if let Some(v) = e.data.get(kid).cloned().or_else(|| k.default.clone()) {
                        label = v;
                    }
                }
            }
            let directed = e.directed.unwrap_or(edge_default_directed);
            all_undirected &= !directed;
            snap.links.push(LinkRecord { src, dst, label: label.clone(), weight: 1.0 });
            if !directed {
                snap.links.push(LinkRecord { src: dst, dst: src, label, weight: 1.0 });
            }
        }
        snap.directed = !all_undirected;
        snap.next_id = self.ids.len() as u64;
        snap.canonicalize();
        self.time += 1;
        Ok(snap)
    }

    /// Like [`Self::import`] but yields a GNA configuration: node labels are
    /// mapped to integer states in first-seen order across the series, link
    /// labels must be integers and attributes are dropped.
    pub fn import_config(&mut self, text: &str) -> Result<GnaConfig, IoError> {
        let mut snap = self.import(text)?;
        for n in &mut snap.nodes {
            let next = self.labels.len() as u64;
            let v = *self.labels.entry(n.label.clone()).or_insert_with(|| {
                self.label_order.push(n.label.clone());
                next
            });
            n.label = v.to_string();
            n.attrs.clear();
        }
        snap.to_config()
    }
}

fn register(nodes: &mut BTreeMap<String, Key>, edges: &mut BTreeMap<String, Key>, domain: &str, id: String, k: Key) {
    match domain {
        "node" => {
            nodes.insert(id, k);
        }
        "edge" => {
            edges.insert(id, k);
        }
        "all" => {
            nodes.insert(id.clone(), k.clone());
            edges.insert(id, k);
        }
        _ => {}
    }
}
