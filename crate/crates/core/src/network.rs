//! Fixed-charge flow networks, flow solutions, and their validity and cost
//! evaluation.
//!
//! A [`FlowNetwork`] is a directed multigraph with one source, one sink, a
//! target flow value and one designated edge that may fail. Edges are keyed by
//! id, so parallel edges between the same pair of vertices are allowed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default absolute tolerance, in flow units, for balance and capacity checks.
pub const DEFAULT_FLOW_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),
    #[error("invalid network: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("malformed network JSON: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// One broken network invariant, naming the offending element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub element: String,
    pub message: String,
}

impl Violation {
    pub fn new(element: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            element: element.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectedEdge {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub capacity: f64,
    pub fixed_cost: f64,
    pub variable_cost: f64,
}

impl DirectedEdge {
    pub fn new(
        id: impl Into<String>,
        tail: impl Into<String>,
        head: impl Into<String>,
        capacity: f64,
        fixed_cost: f64,
        variable_cost: f64,
    ) -> Self {
        Self {
            id: id.into(),
            tail: tail.into(),
            head: head.into(),
            capacity,
            fixed_cost,
            variable_cost,
        }
    }
}

/// On-disk layout of a network. Field names are part of the file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    vertices: Vec<String>,
    edges: Vec<DirectedEdge>,
    source: String,
    sink: String,
    target: f64,
    failable_edge: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "NetworkFile", into = "NetworkFile")]
pub struct FlowNetwork {
    vertices: Vec<String>,
    edges: Vec<DirectedEdge>,
    source: String,
    sink: String,
    target: f64,
    failable_edge: String,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

impl From<NetworkFile> for FlowNetwork {
    fn from(f: NetworkFile) -> Self {
        FlowNetwork::new(
            f.vertices,
            f.edges,
            f.source,
            f.sink,
            f.target,
            f.failable_edge,
        )
    }
}

impl From<FlowNetwork> for NetworkFile {
    fn from(n: FlowNetwork) -> Self {
        NetworkFile {
            vertices: n.vertices,
            edges: n.edges,
            source: n.source,
            sink: n.sink,
            target: n.target,
            failable_edge: n.failable_edge,
        }
    }
}

impl FlowNetwork {
    /// Builds a network without checking it; see [`validate_network`].
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<DirectedEdge>,
        source: impl Into<String>,
        sink: impl Into<String>,
        target: f64,
        failable_edge: impl Into<String>,
    ) -> Self {
        let mut vertex_index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            vertex_index.entry(v.clone()).or_insert(i);
        }
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            edge_index.entry(e.id.clone()).or_insert(i);
        }
        Self {
            vertices,
            edges,
            source: source.into(),
            sink: sink.into(),
            target,
            failable_edge: failable_edge.into(),
            vertex_index,
            edge_index,
        }
    }

    /// Parses a network document and rejects it unless every invariant holds.
    pub fn from_json_str(text: &str) -> Result<Self, NetworkError> {
        let net: FlowNetwork = serde_json::from_str(text)?;
        let violations = validate_network(&net);
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(NetworkError::Invalid(violations))
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serialization cannot fail")
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[DirectedEdge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &DirectedEdge {
        &self.edges[idx]
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn sink(&self) -> &str {
        &self.sink
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn failable_edge(&self) -> &str {
        &self.failable_edge
    }

    pub fn edge_position(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn vertex_position(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    /// Index of the failable edge. Panics on an unvalidated network whose
    /// failable edge is missing.
    pub fn failable_index(&self) -> usize {
        self.edge_position(&self.failable_edge)
            .expect("failable edge must reference an existing edge")
    }

    pub fn source_index(&self) -> usize {
        self.vertex_position(&self.source).expect("source must be a vertex")
    }

    pub fn sink_index(&self) -> usize {
        self.vertex_position(&self.sink).expect("sink must be a vertex")
    }

    /// `(tail, head)` vertex indices of every edge, in edge order.
    pub fn endpoints(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|e| {
                (
                    self.vertex_index[e.tail.as_str()],
                    self.vertex_index[e.head.as_str()],
                )
            })
            .collect()
    }

    /// Copy of this network with a different target flow.
    pub fn with_target(&self, target: f64) -> Self {
        let mut n = self.clone();
        n.target = target;
        n
    }

    /// Copy with a different designated failable edge.
    pub fn with_failable_edge(&self, id: impl Into<String>) -> Self {
        let mut n = self.clone();
        n.failable_edge = id.into();
        n
    }
}

/// Lists every broken network invariant. An empty list means the network is
/// well-formed.
///
/// Besides the structural checks, edges entering the source or leaving the
/// sink are rejected: the target constraint only counts source outflow, so such
/// edges would let a "flow" circulate without ever reaching the sink.
pub fn validate_network(net: &FlowNetwork) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut seen = HashSet::new();
    for v in &net.vertices {
        if !seen.insert(v.as_str()) {
            out.push(Violation::new(format!("vertex `{v}`"), "duplicate vertex id"));
        }
    }
    let has_source = net.vertex_index.contains_key(&net.source);
    let has_sink = net.vertex_index.contains_key(&net.sink);
    if !has_source {
        out.push(Violation::new("source", format!("`{}` is not a vertex", net.source)));
    }
    if !has_sink {
        out.push(Violation::new("sink", format!("`{}` is not a vertex", net.sink)));
    }
    if net.source == net.sink {
        out.push(Violation::new("source", "source and sink must differ"));
    }
    if !(net.target.is_finite() && net.target >= 0.0) {
        out.push(Violation::new("target", format!("must be a finite value >= 0, got {}", net.target)));
    }

    let mut seen = HashSet::new();
    for e in &net.edges {
        let name = format!("edge `{}`", e.id);
        if !seen.insert(e.id.as_str()) {
            out.push(Violation::new(&name, "duplicate edge id"));
        }
        for (label, v) in [("tail", &e.tail), ("head", &e.head)] {
            if !net.vertex_index.contains_key(v) {
                out.push(Violation::new(&name, format!("{label} `{v}` is not a vertex")));
            }
        }
        if e.tail == e.head {
            out.push(Violation::new(&name, "self-loop"));
        }
        for (label, x) in [
            ("capacity", e.capacity),
            ("fixed_cost", e.fixed_cost),
            ("variable_cost", e.variable_cost),
        ] {
            if !(x.is_finite() && x >= 0.0) {
                out.push(Violation::new(&name, format!("{label} must be a finite value >= 0, got {x}")));
            }
        }
        if has_source && e.head == net.source {
            out.push(Violation::new(&name, "edge enters the source"));
        }
        if has_sink && e.tail == net.sink {
            out.push(Violation::new(&name, "edge leaves the sink"));
        }
    }

    if !net.edge_index.contains_key(&net.failable_edge) {
        out.push(Violation::new(
            "failable_edge",
            format!("`{}` does not reference an edge", net.failable_edge),
        ));
    }
    out
}

/// Per-edge flow amounts plus the set of opened edges.
///
/// Edges absent from `flow` carry zero flow. An edge may be open while
/// carrying no flow; it then contributes its fixed cost only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSolution {
    pub flow: BTreeMap<String, f64>,
    pub open: BTreeSet<String>,
    pub cost: f64,
}

impl FlowSolution {
    /// Builds a solution from edge-aligned flow and open vectors and fills in
    /// its cost.
    pub fn from_edge_vectors(net: &FlowNetwork, flow: &[f64], open: &[bool]) -> Self {
        assert_eq!(flow.len(), net.edges.len());
        assert_eq!(open.len(), net.edges.len());
        let mut sol = FlowSolution::default();
        for (i, e) in net.edges.iter().enumerate() {
            if flow[i] != 0.0 {
                sol.flow.insert(e.id.clone(), flow[i]);
            }
            if open[i] {
                sol.open.insert(e.id.clone());
            }
        }
        sol.cost = flow_cost(net, &sol).expect("ids come from the network");
        sol
    }

    pub fn flow_on(&self, edge_id: &str) -> f64 {
        self.flow.get(edge_id).copied().unwrap_or(0.0)
    }

    /// Edge-aligned flow vector.
    pub fn flow_vector(&self, net: &FlowNetwork) -> Result<Vec<f64>, NetworkError> {
        let mut v = vec![0.0; net.edges.len()];
        for (id, &f) in &self.flow {
            let i = net.edge_position(id).ok_or_else(|| NetworkError::UnknownEdge(id.clone()))?;
            v[i] = f;
        }
        Ok(v)
    }

    /// Edge-aligned open indicator vector.
    pub fn open_vector(&self, net: &FlowNetwork) -> Result<Vec<bool>, NetworkError> {
        let mut v = vec![false; net.edges.len()];
        for id in &self.open {
            let i = net.edge_position(id).ok_or_else(|| NetworkError::UnknownEdge(id.clone()))?;
            v[i] = true;
        }
        Ok(v)
    }
}

/// Fixed charges of open edges plus variable cost of every edge's flow.
pub fn flow_cost(net: &FlowNetwork, sol: &FlowSolution) -> Result<f64, NetworkError> {
    let mut fixed = 0.0;
    for id in &sol.open {
        let i = net.edge_position(id).ok_or_else(|| NetworkError::UnknownEdge(id.clone()))?;
        fixed += net.edges[i].fixed_cost;
    }
    let mut variable = 0.0;
    for (id, &f) in &sol.flow {
        let i = net.edge_position(id).ok_or_else(|| NetworkError::UnknownEdge(id.clone()))?;
        variable += net.edges[i].variable_cost * f;
    }
    Ok(fixed + variable)
}

/// [`is_valid_flow_tol`] with the default tolerance.
pub fn is_valid_flow(net: &FlowNetwork, sol: &FlowSolution, exclude_failable: bool) -> bool {
    is_valid_flow_tol(net, sol, exclude_failable, DEFAULT_FLOW_TOLERANCE)
}

/// Checks capacity and open-indicator coupling, conservation at every vertex
/// other than source and sink, and that the source sends out exactly the
/// target. With `exclude_failable`, the failable edge must also be empty.
///
/// `tol` is in flow units and is scaled up by the target when the target
/// exceeds one.
pub fn is_valid_flow_tol(
    net: &FlowNetwork,
    sol: &FlowSolution,
    exclude_failable: bool,
    tol: f64,
) -> bool {
    let (Ok(flow), Ok(open)) = (sol.flow_vector(net), sol.open_vector(net)) else {
        return false;
    };
    let tol = tol * net.target.max(1.0);

    let mut balance = vec![0.0; net.vertices.len()];
    let mut source_out = 0.0;
    for (i, e) in net.edges.iter().enumerate() {
        let f = flow[i];
        if !f.is_finite() || f < -tol {
            return false;
        }
        let cap = if open[i] { e.capacity } else { 0.0 };
        if f > cap + tol {
            return false;
        }
        let (Some(&t), Some(&h)) = (
            net.vertex_index.get(&e.tail),
            net.vertex_index.get(&e.head),
        ) else {
            return false;
        };
        balance[t] -= f;
        balance[h] += f;
        if e.tail == net.source {
            source_out += f;
        }
    }
    for (v, b) in net.vertices.iter().zip(&balance) {
        if *v != net.source && *v != net.sink && b.abs() > tol {
            return false;
        }
    }
    if (source_out - net.target).abs() > tol {
        return false;
    }
    if exclude_failable {
        if let Some(i) = net.edge_position(&net.failable_edge) {
            if flow[i].abs() > tol {
                return false;
            }
        }
    }
    true
}

/// True when every edge opened by `initial` is also open in `repaired`.
pub fn check_repair_pair(_net: &FlowNetwork, initial: &FlowSolution, repaired: &FlowSolution) -> bool {
    initial.open.is_subset(&repaired.open)
}
