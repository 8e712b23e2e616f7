//! Optical network model: elements, directed arcs, validation.
//!
//! Beam splitters use the symmetric convention: with input ports `0, 1` and
//! output ports `0, 1`, the amplitude for `in i -> out j` is the real
//! transmission `t` when `i == j` and `i * r` otherwise, with
//! `r = sqrt(1 - t^2)`. Mirrors and phase shifters multiply by `e^{i phi}`.
//! Splitter ports that carry no arc are open: nothing enters through an unused
//! input and whatever leaves through an unused output is lost.

mod dsl;
mod nested;
mod paths;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dsl::parse_layout;
pub use nested::{build_nested_mzi, NestedMzi, NESTED_MZI_LAYOUT};
pub use paths::{enumerate_paths, enumerate_paths_to, path_amplitude, PathAmplitude, PathDescriptor};
pub(crate) use paths::{walk_amplitude, walks_between};

/// Coupling symbol of an interaction mirror, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mirror {
    A,
    B,
    C,
    E,
    F,
}

impl Mirror {
    pub const ALL: [Mirror; 5] = [Mirror::A, Mirror::B, Mirror::C, Mirror::E, Mirror::F];

    /// Position in the canonical order `A, B, C, E, F`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mirror::A => "A",
            Mirror::B => "B",
            Mirror::C => "C",
            Mirror::E => "E",
            Mirror::F => "F",
        }
    }
}

impl fmt::Display for Mirror {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mirror symbol `{0}` (expected one of A, B, C, E, F)")]
pub struct UnknownMirrorSymbol(pub String);

impl FromStr for Mirror {
    type Err = UnknownMirrorSymbol;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" => Ok(Mirror::A),
            "B" => Ok(Mirror::B),
            "C" => Ok(Mirror::C),
            "E" => Ok(Mirror::E),
            "F" => Ok(Mirror::F),
            other => Err(UnknownMirrorSymbol(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementKind {
    Source,
    BeamSplitter {
        /// Transmission amplitude, `0 <= t <= 1`.
        t: f64,
    },
    Mirror {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        symbol: Option<Mirror>,
        #[serde(default)]
        phase: f64,
        /// Oscillation frequency in Hz.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frequency: Option<f64>,
        /// Tilt amplitude, in pointer units.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tilt: Option<f64>,
    },
    PhaseShifter {
        phase: f64,
    },
    Detector,
}

impl ElementKind {
    pub fn name(&self) -> &'static str {
        match self {
            ElementKind::Source => "source",
            ElementKind::BeamSplitter { .. } => "splitter",
            ElementKind::Mirror { .. } => "mirror",
            ElementKind::PhaseShifter { .. } => "phase",
            ElementKind::Detector => "detector",
        }
    }

    /// (input ports, output ports)
    fn port_capacity(&self) -> (u8, u8) {
        match self {
            ElementKind::Source => (0, 1),
            ElementKind::BeamSplitter { .. } => (2, 2),
            ElementKind::Mirror { .. } | ElementKind::PhaseShifter { .. } => (1, 1),
            ElementKind::Detector => (1, 0),
        }
    }

    pub fn is_splitter(&self) -> bool {
        matches!(self, ElementKind::BeamSplitter { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub label: String,
    #[serde(flatten)]
    pub kind: ElementKind,
}

impl Element {
    pub fn new(label: impl Into<String>, kind: ElementKind) -> Self {
        Self {
            label: label.into(),
            kind,
        }
    }

    pub fn mirror_symbol(&self) -> Option<Mirror> {
        match self.kind {
            ElementKind::Mirror { symbol, .. } => symbol,
            _ => None,
        }
    }
}

/// Directed arc between two element ports. Ports are always 0 for
/// single-mode elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    #[serde(default)]
    pub from_port: u8,
    pub to: String,
    #[serde(default)]
    pub to_port: u8,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayoutError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("graph contains a cycle through `{0}`")]
    Cycle(String),
    #[error("edge refers to undeclared element `{label}`{}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    DanglingEdge { label: String, line: Option<usize> },
    #[error("duplicate element label `{0}`")]
    DuplicateLabel(String),
    #[error("layout has no source")]
    NoSource,
    #[error("layout has more than one source: {0:?}")]
    MultipleSources(Vec<String>),
    #[error("layout has no detector")]
    NoDetector,
    #[error("mirror symbol {0} is used by more than one mirror")]
    DuplicateMirrorSymbol(Mirror),
    #[error("duplicate edge `{from}` -> `{to}`")]
    DuplicateEdge { from: String, to: String },
    #[error("port error on `{label}`: {message}")]
    Port { label: String, message: String },
    #[error("invalid parameter on `{label}`: {message}")]
    InvalidParameter { label: String, message: String },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid graph document: {0}")]
    Document(String),
}

/// Serialized form of a graph. Deserialization re-validates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub elements: Vec<Element>,
    pub edges: Vec<Edge>,
}

/// A validated, acyclic optical network with exactly one source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphDocument", into = "GraphDocument")]
pub struct InterferometerGraph {
    elements: Vec<Element>,
    edges: Vec<Edge>,
    index: BTreeMap<String, usize>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
    source: usize,
}

impl TryFrom<GraphDocument> for InterferometerGraph {
    type Error = LayoutError;

    fn try_from(doc: GraphDocument) -> Result<Self, Self::Error> {
        let mut builder = GraphBuilder::default();
        for element in doc.elements {
            builder.element(element)?;
        }
        for edge in doc.edges {
            builder.edge(edge.from, Some(edge.from_port), edge.to, Some(edge.to_port), None);
        }
        builder.build()
    }
}

impl From<InterferometerGraph> for GraphDocument {
    fn from(graph: InterferometerGraph) -> Self {
        GraphDocument {
            elements: graph.elements,
            edges: graph.edges,
        }
    }
}

impl InterferometerGraph {
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn element(&self, label: &str) -> Option<&Element> {
        self.index.get(label).map(|&i| &self.elements[i])
    }

    pub fn source(&self) -> &Element {
        &self.elements[self.source]
    }

    pub fn detectors(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(|e| matches!(e.kind, ElementKind::Detector))
    }

    /// Label of the mirror carrying `symbol`, if any.
    pub fn mirror_label(&self, symbol: Mirror) -> Option<&str> {
        self.elements
            .iter()
            .find(|e| e.mirror_symbol() == Some(symbol))
            .map(|e| e.label.as_str())
    }

    /// Coupling symbols present in the graph, in canonical order.
    pub fn mirror_symbols(&self) -> Vec<Mirror> {
        let set: BTreeSet<Mirror> = self.elements.iter().filter_map(Element::mirror_symbol).collect();
        set.into_iter().collect()
    }

    pub fn edge_between(&self, from: &str, to: &str) -> Option<&Edge> {
        let &i = self.index.get(from)?;
        self.outgoing[i].iter().map(|&e| &self.edges[e]).find(|e| e.to == to)
    }

    pub fn successors(&self, label: &str) -> Vec<&str> {
        match self.index.get(label) {
            Some(&i) => self.outgoing[i].iter().map(|&e| self.edges[e].to.as_str()).collect(),
            None => Vec::new(),
        }
    }

    /// True when every output port of every non-detector element carries an
    /// arc, so all light ends in some detector.
    pub fn is_lossless(&self) -> bool {
        self.elements.iter().enumerate().all(|(i, e)| {
            let (_, outs) = e.kind.port_capacity();
            self.outgoing[i].len() == outs as usize
        })
    }

    /// Elements with no directed path from the source.
    pub fn unreachable_elements(&self) -> Vec<&str> {
        let mut seen = vec![false; self.elements.len()];
        let mut queue = VecDeque::from([self.source]);
        seen[self.source] = true;
        while let Some(i) = queue.pop_front() {
            for &e in &self.outgoing[i] {
                let j = self.index[&self.edges[e].to];
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        self.elements
            .iter()
            .zip(seen)
            .filter(|(_, s)| !s)
            .map(|(e, _)| e.label.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, LayoutError> {
        serde_json::from_str(text).map_err(|e| LayoutError::Document(e.to_string()))
    }
}

struct PendingEdge {
    from: String,
    from_port: Option<u8>,
    to: String,
    to_port: Option<u8>,
    line: Option<usize>,
}

/// Collects elements and arcs, then validates them into a graph.
#[derive(Default)]
pub(crate) struct GraphBuilder {
    elements: Vec<Element>,
    index: BTreeMap<String, usize>,
    pending: Vec<PendingEdge>,
}

impl GraphBuilder {
    pub(crate) fn element(&mut self, element: Element) -> Result<(), LayoutError> {
        if self.index.contains_key(&element.label) {
            return Err(LayoutError::DuplicateLabel(element.label));
        }
        self.index.insert(element.label.clone(), self.elements.len());
        self.elements.push(element);
        Ok(())
    }

    pub(crate) fn edge(
        &mut self,
        from: String,
        from_port: Option<u8>,
        to: String,
        to_port: Option<u8>,
        line: Option<usize>,
    ) {
        self.pending.push(PendingEdge {
            from,
            from_port,
            to,
            to_port,
            line,
        });
    }

    pub(crate) fn build(self) -> Result<InterferometerGraph, LayoutError> {
        let GraphBuilder {
            elements,
            index,
            pending,
        } = self;

        for e in &elements {
            validate_params(e)?;
        }

        let mut seen_pairs = BTreeSet::new();
        for p in &pending {
            for label in [&p.from, &p.to] {
                if !index.contains_key(label) {
                    return Err(LayoutError::DanglingEdge {
                        label: label.clone(),
                        line: p.line,
                    });
                }
            }
            if !seen_pairs.insert((p.from.clone(), p.to.clone())) {
                return Err(LayoutError::DuplicateEdge {
                    from: p.from.clone(),
                    to: p.to.clone(),
                });
            }
        }

        // Resolve ports: explicit ones first, then fill the lowest free port
        // in declaration order.
        let n = elements.len();
        let mut used_out = vec![[false; 2]; n];
        let mut used_in = vec![[false; 2]; n];
        let port_error = |label: &str, message: String| LayoutError::Port {
            label: label.to_string(),
            message,
        };
        for p in &pending {
            let (fi, ti) = (index[&p.from], index[&p.to]);
            if let Some(port) = p.from_port {
                claim(&elements[fi], &mut used_out[fi], port, "output").map_err(|m| port_error(&p.from, m))?;
            }
            if let Some(port) = p.to_port {
                claim(&elements[ti], &mut used_in[ti], port, "input").map_err(|m| port_error(&p.to, m))?;
            }
        }
        let mut edges = Vec::with_capacity(pending.len());
        for p in &pending {
            let (fi, ti) = (index[&p.from], index[&p.to]);
            let from_port = match p.from_port {
                Some(port) => port,
                None => next_free(&elements[fi], &mut used_out[fi], "output").map_err(|m| port_error(&p.from, m))?,
            };
            let to_port = match p.to_port {
                Some(port) => port,
                None => next_free(&elements[ti], &mut used_in[ti], "input").map_err(|m| port_error(&p.to, m))?,
            };
            edges.push(Edge {
                from: p.from.clone(),
                from_port,
                to: p.to.clone(),
                to_port,
            });
        }

        let mut outgoing = vec![Vec::new(); n];
        let mut incoming = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            outgoing[index[&e.from]].push(k);
            incoming[index[&e.to]].push(k);
        }

        let sources: Vec<usize> = (0..n)
            .filter(|&i| matches!(elements[i].kind, ElementKind::Source))
            .collect();
        let source = match sources.as_slice() {
            [] => return Err(LayoutError::NoSource),
            [s] => *s,
            many => {
                return Err(LayoutError::MultipleSources(
                    many.iter().map(|&i| elements[i].label.clone()).collect(),
                ))
            }
        };
        if !elements.iter().any(|e| matches!(e.kind, ElementKind::Detector)) {
            return Err(LayoutError::NoDetector);
        }

        let mut symbols = BTreeSet::new();
        for e in &elements {
            if let Some(sym) = e.mirror_symbol() {
                if !symbols.insert(sym) {
                    return Err(LayoutError::DuplicateMirrorSymbol(sym));
                }
            }
        }

        // Kahn's algorithm; anything left over sits on a cycle.
        let mut indegree: Vec<usize> = incoming.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut visited = 0;
        while let Some(i) = queue.pop_front() {
            visited += 1;
            for &k in &outgoing[i] {
                let j = index[&edges[k].to];
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
        if visited < n {
            let on_cycle = (0..n).find(|&i| indegree[i] > 0).expect("cycle member");
            return Err(LayoutError::Cycle(elements[on_cycle].label.clone()));
        }

        Ok(InterferometerGraph {
            elements,
            edges,
            index,
            outgoing,
            incoming,
            source,
        })
    }
}

fn claim(element: &Element, used: &mut [bool; 2], port: u8, dir: &str) -> Result<(), String> {
    let (ins, outs) = element.kind.port_capacity();
    let capacity = if dir == "input" { ins } else { outs };
    if port >= capacity.max(1) || capacity == 0 {
        return Err(format!(
            "{} `{}` has no {dir} port {port}",
            element.kind.name(),
            element.label
        ));
    }
    if used[port as usize] {
        return Err(format!("{dir} port {port} used twice"));
    }
    used[port as usize] = true;
    Ok(())
}

fn next_free(element: &Element, used: &mut [bool; 2], dir: &str) -> Result<u8, String> {
    let (ins, outs) = element.kind.port_capacity();
    let capacity = if dir == "input" { ins } else { outs };
    for port in 0..capacity {
        if !used[port as usize] {
            used[port as usize] = true;
            return Ok(port);
        }
    }
    Err(format!(
        "{} `{}` has no free {dir} port (capacity {capacity})",
        element.kind.name(),
        element.label
    ))
}

pub(crate) fn validate_params(e: &Element) -> Result<(), LayoutError> {
    let bad = |message: String| {
        Err(LayoutError::InvalidParameter {
            label: e.label.clone(),
            message,
        })
    };
    match e.kind {
        ElementKind::BeamSplitter { t } => {
            if !(0.0..=1.0).contains(&t) {
                return bad(format!("transmission t = {t} outside [0, 1]"));
            }
        }
        ElementKind::Mirror {
            phase, frequency, tilt, ..
        } => {
            if !phase.is_finite() {
                return bad("phase must be finite".into());
            }
            if let Some(f) = frequency {
                if !(f.is_finite() && f > 0.0) {
                    return bad(format!("frequency {f} must be positive"));
                }
            }
            if let Some(d) = tilt {
                if !(d.is_finite() && d >= 0.0) {
                    return bad(format!("tilt {d} must be non-negative"));
                }
            }
        }
        ElementKind::PhaseShifter { phase } => {
            if !phase.is_finite() {
                return bad("phase must be finite".into());
            }
        }
        ElementKind::Source | ElementKind::Detector => {}
    }
    Ok(())
}
