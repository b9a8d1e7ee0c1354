//! Capture-and-storage infrastructure instances (sources, sinks, candidate
//! pipelines) and their reduction to a fixed-charge flow network.
//!
//! The reduction adds a super-source with one `capture:<source>` edge per
//! source and a super-sink with one `storage:<sink>` edge per sink. Those
//! edges carry the site's capacity and costs; pipes map to edges unchanged.
//! A failing sink becomes a failing storage edge.

mod synthetic;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use synthetic::{nevada_like, random_cid, NevadaLikeParams, RandomCidParams};

use crate::formulation::PairedModelOptions;
use crate::network::{DirectedEdge, FlowNetwork, Violation};

pub const SUPER_SOURCE: &str = "super-source";
pub const SUPER_SINK: &str = "super-sink";

pub fn capture_edge_id(source: &str) -> String {
    format!("capture:{source}")
}

pub fn storage_edge_id(sink: &str) -> String {
    format!("storage:{sink}")
}

#[derive(Debug, Error)]
pub enum CidError {
    #[error("malformed CID JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid CID instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// A capture source or storage sink. Capacity is in flow units per year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Site {
    pub id: String,
    pub capacity: f64,
    pub fixed_cost: f64,
    pub variable_cost: f64,
}

/// A candidate pipeline from `from` to `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pipe {
    pub id: String,
    pub from: String,
    pub to: String,
    pub capacity: f64,
    pub fixed_cost: f64,
    pub variable_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CidInstance {
    /// Free-form label; generated instances say they are synthetic here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub sources: Vec<Site>,
    pub sinks: Vec<Site>,
    #[serde(default)]
    pub junctions: Vec<String>,
    pub pipes: Vec<Pipe>,
    pub target: f64,
    pub failable_sink: String,
    pub project_years: u32,
    /// Optional `[x, y]` per vertex id, passed through for plotting only.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub coordinates: BTreeMap<String, [f64; 2]>,
}

impl CidInstance {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes") + "\n"
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = &str> {
        self.sources
            .iter()
            .map(|s| s.id.as_str())
            .chain(self.junctions.iter().map(String::as_str))
            .chain(self.sinks.iter().map(|s| s.id.as_str()))
    }
}

fn nonneg(out: &mut Vec<Violation>, element: &str, label: &str, x: f64) {
    if !(x.is_finite() && x >= 0.0) {
        out.push(Violation::new(element, format!("{label} must be a finite value >= 0, got {x}")));
    }
}

/// Lists every broken instance invariant.
pub fn validate_cid(cid: &CidInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut vertices = HashSet::new();
    for (kind, id) in cid
        .sources
        .iter()
        .map(|s| ("source", s.id.as_str()))
        .chain(cid.junctions.iter().map(|j| ("junction", j.as_str())))
        .chain(cid.sinks.iter().map(|s| ("sink", s.id.as_str())))
    {
        let element = format!("{kind} `{id}`");
        if !vertices.insert(id) {
            out.push(Violation::new(&element, "duplicate vertex id"));
        }
        if id == SUPER_SOURCE || id == SUPER_SINK {
            out.push(Violation::new(&element, "id is reserved for the reduction"));
        }
    }
    for (kind, sites) in [("source", &cid.sources), ("sink", &cid.sinks)] {
        for s in sites {
            let element = format!("{kind} `{}`", s.id);
            nonneg(&mut out, &element, "capacity", s.capacity);
            nonneg(&mut out, &element, "fixed_cost", s.fixed_cost);
            nonneg(&mut out, &element, "variable_cost", s.variable_cost);
        }
    }
    let mut pipe_ids = HashSet::new();
    for p in &cid.pipes {
        let element = format!("pipe `{}`", p.id);
        if !pipe_ids.insert(p.id.as_str()) {
            out.push(Violation::new(&element, "duplicate pipe id"));
        }
        if p.id.starts_with("capture:") || p.id.starts_with("storage:") {
            out.push(Violation::new(&element, "ids starting with `capture:` or `storage:` are reserved"));
        }
        for (label, v) in [("from", &p.from), ("to", &p.to)] {
            if !vertices.contains(v.as_str()) {
                out.push(Violation::new(&element, format!("{label} `{v}` is not a declared vertex")));
            }
        }
        if p.from == p.to {
            out.push(Violation::new(&element, "self-loop"));
        }
        nonneg(&mut out, &element, "capacity", p.capacity);
        nonneg(&mut out, &element, "fixed_cost", p.fixed_cost);
        nonneg(&mut out, &element, "variable_cost", p.variable_cost);
    }
    nonneg(&mut out, "target", "target", cid.target);
    if cid.project_years < 1 {
        out.push(Violation::new("project_years", "must be at least 1"));
    }
    if !cid.sinks.iter().any(|s| s.id == cid.failable_sink) {
        out.push(Violation::new(
            "failable_sink",
            format!("`{}` is not a declared sink", cid.failable_sink),
        ));
    }
    let supply: f64 = cid.sources.iter().map(|s| s.capacity).sum();
    let storage: f64 = cid.sinks.iter().map(|s| s.capacity).sum();
    if supply < cid.target {
        out.push(Violation::new("sources", format!("total capacity {supply} is below the target {}", cid.target)));
    }
    if storage < cid.target {
        out.push(Violation::new("sinks", format!("total capacity {storage} is below the target {}", cid.target)));
    }
    for id in cid.coordinates.keys() {
        if !vertices.contains(id.as_str()) {
            out.push(Violation::new(format!("coordinates `{id}`"), "not a declared vertex"));
        }
    }
    out
}

/// Parses and checks an instance document. Unknown fields are rejected.
pub fn parse_cid(text: &str) -> Result<CidInstance, CidError> {
    let cid: CidInstance = serde_json::from_str(text)?;
    let v = validate_cid(&cid);
    if v.is_empty() {
        Ok(cid)
    } else {
        Err(CidError::Invalid(v))
    }
}

/// The reduced network and the capture edges that capture-locking pins.
#[derive(Debug, Clone, PartialEq)]
pub struct CidReduction {
    pub network: FlowNetwork,
    pub capture_edges: Vec<String>,
}

impl CidReduction {
    /// Paired-model options locking every capture edge, or no lock.
    pub fn paired_options(&self, lock_capture: bool) -> PairedModelOptions {
        if lock_capture {
            PairedModelOptions::locked(self.capture_edges.iter().cloned())
        } else {
            PairedModelOptions::default()
        }
    }
}

fn site_edge(id: String, tail: &str, head: &str, s: &Site) -> DirectedEdge {
    DirectedEdge::new(id, tail, head, s.capacity, s.fixed_cost, s.variable_cost)
}

/// Builds the fixed-charge network. The caller is expected to have validated
/// `cid` (as [`parse_cid`] does).
pub fn reduce_cid_to_fcnf(cid: &CidInstance) -> CidReduction {
    let mut vertices = vec![SUPER_SOURCE.to_string()];
    vertices.extend(cid.vertex_ids().map(String::from));
    vertices.push(SUPER_SINK.to_string());

    let mut edges = Vec::with_capacity(cid.sources.len() + cid.sinks.len() + cid.pipes.len());
    let mut capture_edges = Vec::with_capacity(cid.sources.len());
    for s in &cid.sources {
        let id = capture_edge_id(&s.id);
        capture_edges.push(id.clone());
        edges.push(site_edge(id, SUPER_SOURCE, &s.id, s));
    }
    for p in &cid.pipes {
        edges.push(DirectedEdge::new(&p.id, &p.from, &p.to, p.capacity, p.fixed_cost, p.variable_cost));
    }
    for s in &cid.sinks {
        edges.push(site_edge(storage_edge_id(&s.id), &s.id, SUPER_SINK, s));
    }
    let network = FlowNetwork::new(
        vertices,
        edges,
        SUPER_SOURCE,
        SUPER_SINK,
        cid.target,
        storage_edge_id(&cid.failable_sink),
    );
    CidReduction { network, capture_edges }
}

/// Scales every variable cost by the project length so annual flow rates
/// price the whole project. Fixed costs are one-off and stay as they are.
pub fn annualize_costs(cid: &CidInstance) -> CidInstance {
    let k = f64::from(cid.project_years);
    let mut out = cid.clone();
    for s in out.sources.iter_mut().chain(out.sinks.iter_mut()) {
        s.variable_cost *= k;
    }
    for p in &mut out.pipes {
        p.variable_cost *= k;
    }
    out
}
