//! MILP builders for the fixed-charge flow problem and its paired
//! initial/repaired variant, plus extraction of flow solutions from solved
//! models.

use std::collections::BTreeSet;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{ConstraintSense, MilpModel, ModelError, ObjectiveSense, VarId};
use crate::network::{validate_network, FlowNetwork, FlowSolution, Violation};

/// Cost magnitudes spanning more than this ratio trigger a conditioning warning.
const CONDITIONING_RATIO: f64 = 1e9;

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error("invalid network: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidNetwork(Vec<Violation>),
    #[error("locked edge `{0}` is not an edge of the network")]
    UnknownLockedEdge(String),
    #[error("locked edges given but capture locking is off")]
    LockedEdgesWithoutLock,
    #[error("{name} must be finite{extra}, got {value}")]
    BadParameter {
        name: &'static str,
        extra: &'static str,
        value: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Options for the paired model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairedModelOptions {
    /// Forces initial and repaired flow to agree on every locked edge.
    pub lock_source_flows: bool,
    pub locked_edges: BTreeSet<String>,
}

impl PairedModelOptions {
    pub fn locked(edges: impl IntoIterator<Item = String>) -> Self {
        Self {
            lock_source_flows: true,
            locked_edges: edges.into_iter().collect(),
        }
    }
}

/// Open indicator and flow variable of every edge for one flow role.
#[derive(Debug, Clone)]
pub struct RoleVars {
    pub open: Vec<VarId>,
    pub flow: Vec<VarId>,
}

impl RoleVars {
    /// `sum(fixed * y + variable * f)` over all edges.
    pub fn cost_terms(&self, net: &FlowNetwork) -> Vec<(VarId, f64)> {
        let mut terms = Vec::with_capacity(2 * self.open.len());
        for (i, e) in net.edges().iter().enumerate() {
            terms.push((self.open[i], e.fixed_cost));
            terms.push((self.flow[i], e.variable_cost));
        }
        terms
    }

    /// Builds a [`FlowSolution`] from solver values. Binaries are rounded and
    /// flows clamped into `[0, capacity]`; the open set comes from the
    /// indicators, so open edges with zero flow are kept.
    pub fn extract(&self, net: &FlowNetwork, values: &[f64]) -> FlowSolution {
        let m = net.edges().len();
        let mut open = vec![false; m];
        let mut flow = vec![0.0; m];
        for (i, e) in net.edges().iter().enumerate() {
            open[i] = values[self.open[i].index()] >= 0.5;
            let f = values[self.flow[i].index()];
            let cap = if open[i] { e.capacity } else { 0.0 };
            let f = f.clamp(0.0, cap);
            flow[i] = if f < 1e-12 * cap.max(1.0) { 0.0 } else { f };
        }
        FlowSolution::from_edge_vectors(net, &flow, &open)
    }

    /// Writes `sol` into the variables of this role.
    pub fn assign(&self, net: &FlowNetwork, sol: &FlowSolution, values: &mut [f64]) {
        for (i, e) in net.edges().iter().enumerate() {
            values[self.open[i].index()] = if sol.open.contains(&e.id) { 1.0 } else { 0.0 };
            values[self.flow[i].index()] = sol.flow.get(&e.id).copied().unwrap_or(0.0);
        }
    }
}

#[derive(Debug, Clone)]
pub struct FcnfModel {
    pub model: MilpModel,
    pub vars: RoleVars,
}

#[derive(Debug, Clone)]
pub struct PairedModel {
    pub model: MilpModel,
    pub initial: RoleVars,
    pub repaired: RoleVars,
}

fn check_network(net: &FlowNetwork) -> Result<(), FormulationError> {
    let v = validate_network(net);
    if v.is_empty() {
        Ok(())
    } else {
        Err(FormulationError::InvalidNetwork(v))
    }
}

fn warn_conditioning(net: &FlowNetwork) {
    let mags = net
        .edges()
        .iter()
        .flat_map(|e| [e.fixed_cost, e.variable_cost])
        .filter(|c| *c > 0.0);
    let (lo, hi) = mags.fold((f64::INFINITY, 0.0_f64), |(lo, hi), c| (lo.min(c), hi.max(c)));
    if hi > 0.0 && hi / lo > CONDITIONING_RATIO {
        warn!(
            "cost coefficients span {lo:e}..{hi:e} (ratio > {CONDITIONING_RATIO:e}); simplex accuracy may suffer"
        );
    }
}

/// Adds the open/flow variables and the capacity, conservation and target
/// rows for one flow role.
fn add_role(model: &mut MilpModel, net: &FlowNetwork, prefix: &str) -> Result<RoleVars, ModelError> {
    let mut open = Vec::with_capacity(net.edges().len());
    let mut flow = Vec::with_capacity(net.edges().len());
    for e in net.edges() {
        open.push(model.add_binary(format!("y{prefix}_{}", e.id))?);
        flow.push(model.add_continuous(format!("f{prefix}_{}", e.id), 0.0, f64::INFINITY)?);
    }
    for (i, e) in net.edges().iter().enumerate() {
        model.add_constraint(
            format!("cap{prefix}_{}", e.id),
            vec![(flow[i], 1.0), (open[i], -e.capacity)],
            ConstraintSense::Le,
            0.0,
        )?;
    }
    let endpoints = net.endpoints();
    let (s, t) = (net.source_index(), net.sink_index());
    for (u, name) in net.vertices().iter().enumerate() {
        if u == s || u == t {
            continue;
        }
        let mut terms = Vec::new();
        for (i, &(tail, head)) in endpoints.iter().enumerate() {
            if tail == u {
                terms.push((flow[i], 1.0));
            }
            if head == u {
                terms.push((flow[i], -1.0));
            }
        }
        model.add_constraint(format!("bal{prefix}_{name}"), terms, ConstraintSense::Eq, 0.0)?;
    }
    let out_of_source = endpoints
        .iter()
        .enumerate()
        .filter(|(_, &(tail, _))| tail == s)
        .map(|(i, _)| (flow[i], 1.0))
        .collect();
    model.add_constraint(format!("target{prefix}"), out_of_source, ConstraintSense::Eq, net.target())?;
    Ok(RoleVars { open, flow })
}

/// The base fixed-charge model: minimum cost of a flow of value target.
pub fn base_fcnf_model(net: &FlowNetwork) -> Result<FcnfModel, FormulationError> {
    check_network(net)?;
    warn_conditioning(net);
    let mut model = MilpModel::new();
    let vars = add_role(&mut model, net, "")?;
    model.set_objective(ObjectiveSense::Minimize, vars.cost_terms(net))?;
    Ok(FcnfModel { model, vars })
}

/// The base model with the failable edge deleted (its variables pinned to
/// zero). Its optimum is the cheapest flow that survives the failure.
pub fn base_fcnf_model_without_failable(net: &FlowNetwork) -> Result<FcnfModel, FormulationError> {
    let mut m = base_fcnf_model(net)?;
    let w = net.failable_index();
    m.model.set_bounds(m.vars.open[w], 0.0, 0.0)?;
    m.model.set_bounds(m.vars.flow[w], 0.0, 0.0)?;
    Ok(m)
}

/// The cheapest repair of a fixed initial flow: the base model without the
/// failable edge, where every initially open edge stays open (the failable
/// one included, at zero flow) and locked edges keep their initial flow.
pub fn repair_model(
    net: &FlowNetwork,
    opts: &PairedModelOptions,
    initial: &FlowSolution,
) -> Result<FcnfModel, FormulationError> {
    if !opts.lock_source_flows && !opts.locked_edges.is_empty() {
        return Err(FormulationError::LockedEdgesWithoutLock);
    }
    let mut m = base_fcnf_model(net)?;
    let w = net.failable_index();
    for (i, e) in net.edges().iter().enumerate() {
        if initial.open.contains(&e.id) {
            m.model.set_bounds(m.vars.open[i], 1.0, 1.0)?;
        } else if i == w {
            m.model.set_bounds(m.vars.open[i], 0.0, 0.0)?;
        }
    }
    m.model.set_bounds(m.vars.flow[w], 0.0, 0.0)?;
    for id in &opts.locked_edges {
        let i = net
            .edge_position(id)
            .ok_or_else(|| FormulationError::UnknownLockedEdge(id.clone()))?;
        let f = initial.flow.get(id).copied().unwrap_or(0.0);
        if i == w {
            // Contradicts the failure when f > 0; the row keeps that visible.
            m.model
                .add_constraint(format!("lock_{id}"), vec![(m.vars.flow[i], 1.0)], ConstraintSense::Eq, f)?;
        } else {
            m.model.set_bounds(m.vars.flow[i], f, f)?;
        }
    }
    Ok(m)
}

/// Initial and repaired flow blocks, the failed-edge row, the
/// initial-implies-repaired indicator rows and optional flow locks. No
/// objective is attached.
pub fn paired_model(net: &FlowNetwork, opts: &PairedModelOptions) -> Result<PairedModel, FormulationError> {
    check_network(net)?;
    if !opts.lock_source_flows && !opts.locked_edges.is_empty() {
        return Err(FormulationError::LockedEdgesWithoutLock);
    }
    let mut locked = Vec::new();
    for id in &opts.locked_edges {
        let i = net
            .edge_position(id)
            .ok_or_else(|| FormulationError::UnknownLockedEdge(id.clone()))?;
        locked.push(i);
    }
    warn_conditioning(net);

    let mut model = MilpModel::new();
    let initial = add_role(&mut model, net, "i")?;
    let repaired = add_role(&mut model, net, "r")?;

    let w = net.failable_index();
    model.add_constraint("failed", vec![(repaired.flow[w], 1.0)], ConstraintSense::Eq, 0.0)?;
    for (i, e) in net.edges().iter().enumerate() {
        model.add_constraint(
            format!("keep_{}", e.id),
            vec![(repaired.open[i], 1.0), (initial.open[i], -1.0)],
            ConstraintSense::Ge,
            0.0,
        )?;
    }
    for i in locked {
        let e = net.edge(i);
        model.add_constraint(
            format!("lock_{}", e.id),
            vec![(initial.flow[i], 1.0), (repaired.flow[i], -1.0)],
            ConstraintSense::Eq,
            0.0,
        )?;
    }
    Ok(PairedModel {
        model,
        initial,
        repaired,
    })
}

/// Half-width of the band used to impose "cost = value" for a value that is
/// itself a solver result.
pub fn equality_band(value: f64) -> f64 {
    1e-6 * value.abs().max(1.0)
}

fn add_banded_equality(model: &mut MilpModel, name: &str, terms: Vec<(VarId, f64)>, value: f64) -> Result<(), ModelError> {
    let band = equality_band(value);
    model.add_constraint(format!("{name}_lo"), terms.clone(), ConstraintSense::Ge, value - band)?;
    model.add_constraint(format!("{name}_hi"), terms, ConstraintSense::Le, value + band)
}

fn finite(name: &'static str, value: f64) -> Result<(), FormulationError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(FormulationError::BadParameter { name, extra: "", value })
    }
}

/// Largest repaired cost strictly below the previous one: maximize repaired
/// cost subject to `repaired cost <= r_last - epsilon`.
pub fn milp1(
    net: &FlowNetwork,
    opts: &PairedModelOptions,
    r_last: f64,
    epsilon: f64,
) -> Result<PairedModel, FormulationError> {
    finite("r_last", r_last)?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(FormulationError::BadParameter {
            name: "epsilon",
            extra: " and > 0",
            value: epsilon,
        });
    }
    let mut pm = paired_model(net, opts)?;
    let cost = pm.repaired.cost_terms(net);
    pm.model.add_constraint("repaired_cap", cost.clone(), ConstraintSense::Le, r_last - epsilon)?;
    pm.model.set_objective(ObjectiveSense::Maximize, cost)?;
    Ok(pm)
}

/// How the second step ties the repaired cost to the first step's optimum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepairLink {
    /// Repaired cost equals the value (within [`equality_band`]). Can
    /// return a dominated pair when no cheapest-initial pair hits the value
    /// exactly.
    Equal,
    /// Repaired cost is at most the value (plus the band).
    #[default]
    AtMost,
}

/// Cheapest initial flow whose repaired flow costs exactly `r_step1`.
pub fn milp2(net: &FlowNetwork, opts: &PairedModelOptions, r_step1: f64) -> Result<PairedModel, FormulationError> {
    milp2_with_link(net, opts, r_step1, RepairLink::Equal)
}

/// [`milp2`] with a choice of how the repaired cost is tied to `r_step1`.
pub fn milp2_with_link(
    net: &FlowNetwork,
    opts: &PairedModelOptions,
    r_step1: f64,
    link: RepairLink,
) -> Result<PairedModel, FormulationError> {
    finite("r_step1", r_step1)?;
    let mut pm = paired_model(net, opts)?;
    let cost = pm.repaired.cost_terms(net);
    match link {
        RepairLink::Equal => add_banded_equality(&mut pm.model, "repaired_cost", cost, r_step1)?,
        RepairLink::AtMost => pm.model.add_constraint(
            "repaired_cost",
            cost,
            ConstraintSense::Le,
            r_step1 + equality_band(r_step1),
        )?,
    }
    pm.model.set_objective(ObjectiveSense::Minimize, pm.initial.cost_terms(net))?;
    Ok(pm)
}

/// Cheapest repaired flow among pairs whose initial flow costs `i_step2`.
pub fn milp3(net: &FlowNetwork, opts: &PairedModelOptions, i_step2: f64) -> Result<PairedModel, FormulationError> {
    finite("i_step2", i_step2)?;
    let mut pm = paired_model(net, opts)?;
    add_banded_equality(&mut pm.model, "initial_cost", pm.initial.cost_terms(net), i_step2)?;
    pm.model.set_objective(ObjectiveSense::Minimize, pm.repaired.cost_terms(net))?;
    Ok(pm)
}

/// Adds `initial cost >= initial_floor` and `repaired cost >= repaired_floor`
/// for the floors given. With the base optimum and the failure-free optimum
/// as floors no pair is cut off. A floor on the minimized cost flattens the
/// relaxation bound onto the floor and starves branching of information, so
/// callers should floor only the other cost.
pub fn add_cost_floors(
    net: &FlowNetwork,
    pm: &mut PairedModel,
    initial_floor: Option<f64>,
    repaired_floor: Option<f64>,
) -> Result<(), FormulationError> {
    if let Some(floor) = initial_floor {
        finite("initial_floor", floor)?;
        let terms = pm.initial.cost_terms(net);
        pm.model.add_constraint("initial_floor", terms, ConstraintSense::Ge, floor)?;
    }
    if let Some(floor) = repaired_floor {
        finite("repaired_floor", floor)?;
        let terms = pm.repaired.cost_terms(net);
        pm.model.add_constraint("repaired_floor", terms, ConstraintSense::Ge, floor)?;
    }
    Ok(())
}
