//! GEXF 1.2 read/write.
//!
//! The writer emits a directed graph with edge weights carrying forward
//! multiplicities and optional per-node `bridge_score` and `community`
//! attributes. The reader accepts exactly that dialect: directed graphs only,
//! every edge endpoint declared, integral weights.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use quick_xml::events::{BytesDecl, BytesEnd, BytesStart, Event};
use quick_xml::{Reader, Writer};

use crate::community::Partition;
use crate::error::{Error, Result};
use crate::graph::ForwardGraph;

const XMLNS: &str = "http://www.gexf.net/1.2draft";

const ATTR_IS_SEED: &str = "is_seed";
const ATTR_BRIDGE_SCORE: &str = "bridge_score";
const ATTR_COMMUNITY: &str = "community";

/// A parsed GEXF document: the graph plus whatever node annotations the file
/// carried.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GexfDocument {
    pub graph: ForwardGraph,
    /// Normalized id -> bridge score, for nodes that carried the attribute.
    pub bridge_scores: BTreeMap<String, f64>,
    /// Normalized id -> community id, for nodes that carried the attribute.
    pub communities: BTreeMap<String, usize>,
}

/// Writes `g` as a GEXF 1.2 document. `scores` and `partition`, when given,
/// become node attributes keyed by normalized channel id.
pub fn write_gexf<W: Write>(
    g: &ForwardGraph,
    scores: Option<&BTreeMap<String, f64>>,
    partition: Option<&Partition>,
    out: W,
) -> Result<()> {
    let mut w = Writer::new_with_indent(out, b' ', 2);
    let io = |e: quick_xml::Error| Error::Parse(format!("GEXF write: {e}"));
    w.write_event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)))
        .map_err(io)?;

    let mut gexf = BytesStart::new("gexf");
    gexf.push_attribute(("xmlns", XMLNS));
    gexf.push_attribute(("version", "1.2"));
    w.write_event(Event::Start(gexf)).map_err(io)?;

    let mut graph = BytesStart::new("graph");
    graph.push_attribute(("defaultedgetype", "directed"));
    w.write_event(Event::Start(graph)).map_err(io)?;

    let mut attrs = BytesStart::new("attributes");
    attrs.push_attribute(("class", "node"));
    w.write_event(Event::Start(attrs)).map_err(io)?;
    let mut declare = |id: &str, title: &str, ty: &str| -> Result<()> {
        let mut a = BytesStart::new("attribute");
        a.push_attribute(("id", id));
        a.push_attribute(("title", title));
        a.push_attribute(("type", ty));
        w.write_event(Event::Empty(a)).map_err(io)
    };
    declare("0", ATTR_IS_SEED, "boolean")?;
    if scores.is_some() {
        declare("1", ATTR_BRIDGE_SCORE, "double")?;
    }
    if partition.is_some() {
        declare("2", ATTR_COMMUNITY, "long")?;
    }
    w.write_event(Event::End(BytesEnd::new("attributes")))
        .map_err(io)?;

    w.write_event(Event::Start(BytesStart::new("nodes")))
        .map_err(io)?;
    for idx in 0..g.node_count() {
        let id = g.id(idx);
        let mut node = BytesStart::new("node");
        node.push_attribute(("id", id));
        node.push_attribute(("label", g.label(idx)));
        w.write_event(Event::Start(node)).map_err(io)?;
        w.write_event(Event::Start(BytesStart::new("attvalues")))
            .map_err(io)?;
        let mut attvalue = |for_id: &str, value: String| -> Result<()> {
            let mut a = BytesStart::new("attvalue");
            a.push_attribute(("for", for_id));
            a.push_attribute(("value", value.as_str()));
            w.write_event(Event::Empty(a)).map_err(io)
        };
        attvalue("0", g.is_seed(idx).to_string())?;
        if let Some(score) = scores.and_then(|m| m.get(id)) {
            attvalue("1", score.to_string())?;
        }
        if let Some(comm) = partition.and_then(|p| p.assignment.get(id)) {
            attvalue("2", comm.to_string())?;
        }
        w.write_event(Event::End(BytesEnd::new("attvalues")))
            .map_err(io)?;
        w.write_event(Event::End(BytesEnd::new("node"))).map_err(io)?;
    }
    w.write_event(Event::End(BytesEnd::new("nodes"))).map_err(io)?;

    w.write_event(Event::Start(BytesStart::new("edges")))
        .map_err(io)?;
    for (n, (s, t, weight)) in g.edges().enumerate() {
        let mut edge = BytesStart::new("edge");
        edge.push_attribute(("id", n.to_string().as_str()));
        edge.push_attribute(("source", g.id(s)));
        edge.push_attribute(("target", g.id(t)));
        edge.push_attribute(("weight", weight.to_string().as_str()));
        w.write_event(Event::Empty(edge)).map_err(io)?;
    }
    w.write_event(Event::End(BytesEnd::new("edges"))).map_err(io)?;

    w.write_event(Event::End(BytesEnd::new("graph"))).map_err(io)?;
    w.write_event(Event::End(BytesEnd::new("gexf"))).map_err(io)?;
    Ok(())
}

fn attr_of(e: &BytesStart, name: &str) -> Result<Option<String>> {
    for attr in e.attributes() {
        let attr = attr.map_err(|err| Error::Parse(format!("GEXF: bad attribute: {err}")))?;
        if attr.key.as_ref() == name.as_bytes() {
            let value = attr
                .unescape_value()
                .map_err(|err| Error::Parse(format!("GEXF: bad attribute value: {err}")))?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

fn required_attr(e: &BytesStart, name: &str, element: &str) -> Result<String> {
    attr_of(e, name)?.ok_or_else(|| {
        Error::Parse(format!("GEXF: <{element}> element missing {name:?} attribute"))
    })
}

struct PendingNode {
    id: String,
    label: String,
    is_seed: bool,
    bridge_score: Option<f64>,
    community: Option<usize>,
}

/// Parses a GEXF 1.2 document produced by [`write_gexf`] (or compatible).
/// Undirected graphs, unknown versions, dangling edge endpoints, duplicate
/// pairs, and self-loops are rejected with an error naming the offender.
pub fn read_gexf<R: BufRead>(input: R) -> Result<GexfDocument> {
    let mut reader = Reader::from_reader(input);
    reader.config_mut().trim_text(true);
    let mut buf = Vec::new();

    let mut saw_gexf = false;
    let mut saw_directed_graph = false;
    // Declared node attribute id -> title.
    let mut attr_titles: BTreeMap<String, String> = BTreeMap::new();
    let mut nodes: Vec<PendingNode> = Vec::new();
    let mut edges: Vec<(String, String, u64)> = Vec::new();
    let mut current: Option<PendingNode> = None;

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| Error::Parse(format!("GEXF: malformed XML at byte {}: {e}", reader.buffer_position())))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                match e.local_name().as_ref() {
                    b"gexf" => {
                        let version = required_attr(e, "version", "gexf")?;
                        if !version.starts_with("1.2") {
                            return Err(Error::Parse(format!(
                                "GEXF: unsupported version {version:?}, expected 1.2"
                            )));
                        }
                        saw_gexf = true;
                    }
                    b"graph" => {
                        let ty = attr_of(e, "defaultedgetype")?.unwrap_or_else(|| "undirected".to_string());
                        if ty != "directed" {
                            return Err(Error::Parse(format!(
                                "GEXF: defaultedgetype {ty:?} rejected, only directed graphs are supported"
                            )));
                        }
                        saw_directed_graph = true;
                    }
                    b"attribute" => {
                        let id = required_attr(e, "id", "attribute")?;
                        let title = required_attr(e, "title", "attribute")?;
                        attr_titles.insert(id, title);
                    }
                    b"node" => {
                        let id = required_attr(e, "id", "node")?;
                        let label = attr_of(e, "label")?.unwrap_or_else(|| id.clone());
                        let node = PendingNode {
                            id,
                            label,
                            is_seed: false,
                            bridge_score: None,
                            community: None,
                        };
                        if empty {
                            nodes.push(node);
                        } else {
                            current = Some(node);
                        }
                    }
                    b"attvalue" => {
                        let for_id = required_attr(e, "for", "attvalue")?;
                        let value = required_attr(e, "value", "attvalue")?;
                        let Some(node) = current.as_mut() else {
                            return Err(Error::Parse(
                                "GEXF: <attvalue> outside a <node> element".to_string(),
                            ));
                        };
                        match attr_titles.get(&for_id).map(String::as_str) {
                            Some(ATTR_IS_SEED) => {
                                node.is_seed = value.parse().map_err(|_| {
                                    Error::Parse(format!(
                                        "GEXF: node {:?}: is_seed value {value:?} is not a boolean",
                                        node.id
                                    ))
                                })?;
                            }
                            Some(ATTR_BRIDGE_SCORE) => {
                                node.bridge_score = Some(value.parse().map_err(|_| {
                                    Error::Parse(format!(
                                        "GEXF: node {:?}: bridge_score value {value:?} is not a number",
                                        node.id
                                    ))
                                })?);
                            }
                            Some(ATTR_COMMUNITY) => {
                                node.community = Some(value.parse().map_err(|_| {
                                    Error::Parse(format!(
                                        "GEXF: node {:?}: community value {value:?} is not an integer",
                                        node.id
                                    ))
                                })?);
                            }
                            // Unknown attributes are ignored for interop.
                            _ => {}
                        }
                    }
                    b"edge" => {
                        if let Some(ty) = attr_of(e, "type")? {
                            if ty != "directed" {
                                return Err(Error::Parse(format!(
                                    "GEXF: edge with type {ty:?} rejected, only directed edges are supported"
                                )));
                            }
                        }
                        let source = required_attr(e, "source", "edge")?;
                        let target = required_attr(e, "target", "edge")?;
                        let weight = match attr_of(e, "weight")? {
                            None => 1,
                            Some(raw) => {
                                let parsed: f64 = raw.parse().map_err(|_| {
                                    Error::Parse(format!(
                                        "GEXF: edge {source} -> {target}: weight {raw:?} is not a number"
                                    ))
                                })?;
                                if !parsed.is_finite() || parsed < 1.0 || parsed.fract() != 0.0 {
                                    return Err(Error::Parse(format!(
                                        "GEXF: edge {source} -> {target}: weight {raw:?} is not a positive integer"
                                    )));
                                }
                                parsed as u64
                            }
                        };
                        edges.push((source, target, weight));
                    }
                    _ => {}
                }
            }
            Event::End(ref e) => {
                if e.local_name().as_ref() == b"node" {
                    if let Some(node) = current.take() {
                        nodes.push(node);
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    if !saw_gexf {
        return Err(Error::Parse("GEXF: missing <gexf> root element".to_string()));
    }
    if !saw_directed_graph {
        return Err(Error::Parse("GEXF: missing directed <graph> element".to_string()));
    }

    let mut doc = GexfDocument::default();
    for node in &nodes {
        if doc.graph.node_idx(&node.id).is_some() {
            return Err(Error::Parse(format!(
                "GEXF: duplicate node id {:?} after normalization",
                node.id
            )));
        }
        let idx = doc
            .graph
            .add_node_labeled(&node.id, &node.label)
            .map_err(|e| Error::Parse(format!("GEXF: node {:?}: {e}", node.id)))?;
        if node.is_seed {
            doc.graph.mark_seed(&node.id)?;
        }
        let id = doc.graph.id(idx).to_string();
        if let Some(score) = node.bridge_score {
            doc.bridge_scores.insert(id.clone(), score);
        }
        if let Some(comm) = node.community {
            doc.communities.insert(id, comm);
        }
    }
    for (source, target, weight) in edges {
        for endpoint in [&source, &target] {
            if doc.graph.node_idx(endpoint).is_none() {
                return Err(Error::Parse(format!(
                    "GEXF: edge {source} -> {target} references undeclared node {endpoint:?}"
                )));
            }
        }
        doc.graph
            .add_edge_with_weight(&source, &target, weight)
            .map_err(|e| Error::Parse(format!("GEXF: edge {source} -> {target}: {e}")))?;
    }
    Ok(doc)
}
