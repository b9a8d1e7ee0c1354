//! The iterative driver: starting from the minimum-cost flow, each step finds
//! the next pair of initial and repaired flows with a cheaper repair, until
//! no cheaper repair exists.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulation::{
    base_fcnf_model, base_fcnf_model_without_failable, add_cost_floors, milp1, milp2_with_link, milp3, paired_model, repair_model,
    FormulationError, PairedModel, PairedModelOptions, RepairLink,
};
use crate::milp::{solve, solve_with, MilpResult, SolveHints, SolveStatus, SolverConfig};
use crate::network::{FlowNetwork, FlowSolution};

pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;
/// Relative tolerance for the endpoint check against the terminal cost.
pub const ENDPOINT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ParetoError {
    #[error("no flow of the target value exists")]
    NoFlow,
    #[error("no flow of the target value survives the loss of the failable edge")]
    NoRepair,
    #[error("epsilon must be finite and > 0, got {0}")]
    BadEpsilon(f64),
    #[error("previous repaired cost must be finite, got {0}")]
    BadRepairedCost(f64),
    #[error("{stage} hit a solver limit")]
    Limit { stage: &'static str },
    #[error("{stage}: {detail}")]
    Inconsistent { stage: &'static str, detail: String },
    #[error("stopped after {0} iterations without exhausting the front")]
    IterationCap(usize),
    #[error("last repaired cost {last} does not match the failure-free optimum {terminal}")]
    EndpointMismatch { last: f64, terminal: f64 },
    #[error(transparent)]
    Formulation(#[from] FormulationError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParetoPoint {
    pub iteration: usize,
    pub initial_cost: f64,
    pub repaired_cost: f64,
    pub initial: FlowSolution,
    pub repaired: FlowSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParetoFront {
    pub epsilon: f64,
    pub terminal_cost: f64,
    pub points: Vec<ParetoPoint>,
}

impl ParetoFront {
    pub fn costs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.initial_cost, p.repaired_cost)).collect()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("front serializes") + "\n"
    }

    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// `iteration,initial_cost,repaired_cost`, one row per point, costs with
    /// six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,initial_cost,repaired_cost\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{:.6},{:.6}", p.iteration, p.initial_cost, p.repaired_cost);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoSettings {
    /// Step size; `None` picks [`default_epsilon`] of the terminal cost.
    pub epsilon: Option<f64>,
    pub max_iterations: usize,
    pub link: RepairLink,
    pub solver: SolverConfig,
}

impl Default for ParetoSettings {
    fn default() -> Self {
        Self {
            epsilon: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            link: RepairLink::default(),
            solver: SolverConfig::default(),
        }
    }
}

pub fn default_epsilon(terminal_cost: f64) -> f64 {
    1e-4 * terminal_cost.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum NextPoint {
    Found(ParetoPoint),
    Exhausted,
}

/// Solves with `hints` and returns `(objective, values)`;
/// infeasibility is `None`.
fn run(
    model: &PairedModel,
    config: &SolverConfig,
    stage: &'static str,
    hints: SolveHints<'_>,
) -> Result<Option<(f64, Vec<f64>)>, ParetoError> {
    let r: MilpResult = solve_with(&model.model, config, &hints);
    log::debug!(
        "{stage}: {:?} {:?} after {} nodes in {:.3?}",
        r.status,
        r.objective_value,
        r.stats.nodes,
        r.stats.wall_time
    );
    match r.status {
        SolveStatus::Optimal => Ok(Some((r.objective_value.expect("optimal has value"), r.values.expect("optimal has values")))),
        SolveStatus::Infeasible => Ok(None),
        SolveStatus::IterationLimit => Err(ParetoError::Limit { stage }),
        SolveStatus::Unbounded => Err(ParetoError::Inconsistent {
            stage,
            detail: "model reported unbounded".into(),
        }),
    }
}

fn point(net: &FlowNetwork, model: &PairedModel, values: &[f64], iteration: usize) -> ParetoPoint {
    let initial = model.initial.extract(net, values);
    let repaired = model.repaired.extract(net, values);
    ParetoPoint {
        iteration,
        initial_cost: initial.cost,
        repaired_cost: repaired.cost,
        initial,
        repaired,
    }
}

/// Iteration 0: a minimum-cost initial flow with the cheapest repair among
/// all minimum-cost initial flows.
pub fn initial_point(
    net: &FlowNetwork,
    opts: &PairedModelOptions,
    config: &SolverConfig,
) -> Result<ParetoPoint, ParetoError> {
    first_point(net, opts, config, None)
}

/// [`initial_point`]; a known failure-free optimum bounds the repair search.
fn first_point(
    net: &FlowNetwork,
    opts: &PairedModelOptions,
    config: &SolverConfig,
    terminal_cost: Option<f64>,
) -> Result<ParetoPoint, ParetoError> {
    let base = base_fcnf_model(net)?;
    let r = solve(&base.model, config);
    let (c_star, base_values) = match r.status {
        SolveStatus::Optimal => (
            r.objective_value.expect("optimal has value"),
            r.values.expect("optimal has values"),
        ),
        SolveStatus::Infeasible => return Err(ParetoError::NoFlow),
        SolveStatus::IterationLimit => return Err(ParetoError::Limit { stage: "base model" }),
        SolveStatus::Unbounded => {
            return Err(ParetoError::Inconsistent {
                stage: "base model",
                detail: "model reported unbounded".into(),
            })
        }
    };
    let m3 = milp3(net, opts, c_star)?;
    let start = repair_start(net, opts, &m3, &base.vars.extract(net, &base_values), config)?;
    let hints = SolveHints {
        start: start.as_deref(),
        objective_bound: terminal_cost,
    };
    match run(&m3, config, "iteration 0 repair", hints)? {
        Some((_, values)) => Ok(point(net, &m3, &values, 0)),
        None => Err(ParetoError::NoRepair),
    }
}

/// `initial` paired with its cheapest repair, laid out for `model`; `None`
/// when that flow has no repair.
fn repair_start(
    net: &FlowNetwork,
    opts: &PairedModelOptions,
    model: &PairedModel,
    initial: &FlowSolution,
    config: &SolverConfig,
) -> Result<Option<Vec<f64>>, ParetoError> {
    let rm = repair_model(net, opts, initial)?;
    let r = solve(&rm.model, config);
    let Some(values) = r.values.filter(|_| r.status == SolveStatus::Optimal) else {
        return Ok(None);
    };
    let mut x = vec![0.0; model.model.variables().len()];
    model.initial.assign(net, initial, &mut x);
    model.repaired.assign(net, &rm.vars.extract(net, &values), &mut x);
    Ok(Some(x))
}

/// One iteration: the largest repaired cost at most `r_last - epsilon`, the
/// cheapest initial flow achieving it, then the cheapest repair at that
/// initial cost. `Exhausted` when no repair is that cheap.
pub fn next_point(
    net: &FlowNetwork,
    opts: &PairedModelOptions,
    r_last: f64,
    epsilon: f64,
    iteration: usize,
    settings: &ParetoSettings,
) -> Result<NextPoint, ParetoError> {
    step(net, opts, r_last, epsilon, iteration, settings, None)
}

/// Facts from earlier solves that speed up every iteration without changing
/// its result.
struct Known {
    base_cost: f64,
    terminal_cost: f64,
    /// The failure-free optimum used as both flows. It is feasible for every
    /// MILP 1 that has a solution at all, so it seeds that search.
    survivor_pair: Vec<f64>,
}

fn step(
    net: &FlowNetwork,
    opts: &PairedModelOptions,
    r_last: f64,
    epsilon: f64,
    iteration: usize,
    settings: &ParetoSettings,
    known: Option<&Known>,
) -> Result<NextPoint, ParetoError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(ParetoError::BadEpsilon(epsilon));
    }
    if !r_last.is_finite() {
        return Err(ParetoError::BadRepairedCost(r_last));
    }
    let config = &settings.solver;
    let mut m1 = milp1(net, opts, r_last, epsilon)?;
    if let Some(k) = known {
        add_cost_floors(net, &mut m1, Some(k.base_cost), Some(k.terminal_cost))?;
    }
    let hints = SolveHints {
        start: known.map(|k| k.survivor_pair.as_slice()),
        objective_bound: Some(r_last - epsilon),
    };
    let Some((r_step1, v1)) = run(&m1, config, "MILP 1", hints)? else {
        return Ok(NextPoint::Exhausted);
    };
    settle(net, opts, r_step1, &v1, iteration, settings, known).map(NextPoint::Found)
}

/// MILP 2 and 3 of an iteration: the cheapest initial flow whose repair costs
/// at most `r_step1`, then its cheapest repair. `start` is any pair feasible
/// for MILP 2.
fn settle(
    net: &FlowNetwork,
    opts: &PairedModelOptions,
    r_step1: f64,
    start: &[f64],
    iteration: usize,
    settings: &ParetoSettings,
    known: Option<&Known>,
) -> Result<ParetoPoint, ParetoError> {
    let config = &settings.solver;
    let mut m2 = milp2_with_link(net, opts, r_step1, settings.link)?;
    if let Some(k) = known {
        add_cost_floors(net, &mut m2, None, Some(k.terminal_cost))?;
    }
    let hints = SolveHints {
        start: Some(start),
        objective_bound: known.map(|k| k.base_cost),
    };
    let Some((i_step2, v2)) = run(&m2, config, "MILP 2", hints)? else {
        return Err(ParetoError::Inconsistent {
            stage: "MILP 2",
            detail: format!("infeasible at repaired cost {r_step1}"),
        });
    };
    let m3 = milp3(net, opts, i_step2)?;
    let hints = SolveHints {
        start: Some(&v2),
        objective_bound: known.map(|k| k.terminal_cost),
    };
    let Some((_, values)) = run(&m3, config, "MILP 3", hints)? else {
        return Err(ParetoError::Inconsistent {
            stage: "MILP 3",
            detail: format!("infeasible at initial cost {i_step2}"),
        });
    };
    Ok(point(net, &m3, &values, iteration))
}

/// Runs the driver to exhaustion and checks the last repaired cost against
/// the optimum of the network without the failable edge. Consecutive
/// repaired costs drop by at least epsilon, except that a final point at the
/// failure-free optimum is always included, even when it is closer.
pub fn pareto_front(
    net: &FlowNetwork,
    opts: &PairedModelOptions,
    settings: &ParetoSettings,
) -> Result<ParetoFront, ParetoError> {
    if let Some(eps) = settings.epsilon {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(ParetoError::BadEpsilon(eps));
        }
    }
    let config = &settings.solver;
    let terminal = base_fcnf_model_without_failable(net)?;
    let r = solve(&terminal.model, config);
    let (terminal_cost, terminal_values) = match r.status {
        SolveStatus::Optimal => (
            r.objective_value.expect("optimal has value"),
            r.values.expect("optimal has values"),
        ),
        SolveStatus::Infeasible => {
            // Distinguish "no flow at all" from "no flow without the edge".
            initial_point(net, opts, config)?;
            return Err(ParetoError::NoRepair);
        }
        SolveStatus::IterationLimit => return Err(ParetoError::Limit { stage: "terminal model" }),
        SolveStatus::Unbounded => {
            return Err(ParetoError::Inconsistent {
                stage: "terminal model",
                detail: "model reported unbounded".into(),
            })
        }
    };
    let epsilon = settings.epsilon.unwrap_or_else(|| default_epsilon(terminal_cost));

    let first = first_point(net, opts, config, Some(terminal_cost))?;
    let shape = paired_model(net, opts)?;
    let survivor = terminal.vars.extract(net, &terminal_values);
    let mut survivor_pair = vec![0.0; shape.model.variables().len()];
    shape.initial.assign(net, &survivor, &mut survivor_pair);
    shape.repaired.assign(net, &survivor, &mut survivor_pair);
    let known = Known {
        base_cost: first.initial_cost,
        terminal_cost,
        survivor_pair,
    };

    let mut points = vec![first];
    loop {
        let last = points.last().expect("front is nonempty");
        if points.len() > settings.max_iterations {
            return Err(ParetoError::IterationCap(settings.max_iterations));
        }
        match step(net, opts, last.repaired_cost, epsilon, points.len(), settings, Some(&known))? {
            NextPoint::Found(p) => points.push(p),
            NextPoint::Exhausted => break,
        }
    }

    // A step wider than the remaining range stops short of the failure-free
    // optimum; close the front there. Only this last drop may be below epsilon.
    let last = points.last().expect("front is nonempty").repaired_cost;
    if last > terminal_cost + ENDPOINT_TOLERANCE * terminal_cost.abs().max(1.0) {
        let closing = settle(net, opts, terminal_cost, &known.survivor_pair, points.len(), settings, Some(&known))?;
        points.push(closing);
    }

    let last = points.last().expect("front is nonempty").repaired_cost;
    if (last - terminal_cost).abs() > ENDPOINT_TOLERANCE * terminal_cost.abs().max(1.0) {
        return Err(ParetoError::EndpointMismatch {
            last,
            terminal: terminal_cost,
        });
    }
    Ok(ParetoFront {
        epsilon,
        terminal_cost,
        points,
    })
}
