//! Best-bound branch-and-bound over binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::simplex::{solve_dense, LpData, LpEngine, LpParams, LpRow, LpSolution, LpStatus, WarmStart};
use super::{MilpModel, MilpResult, ObjectiveSense, SolveStats, SolveStatus, SolverConfig};

/// Absolute pruning slack, scaled by the incumbent magnitude.
const PRUNE_TOL: f64 = 1e-9;

struct Prepared {
    lp: LpData,
    lower: Vec<f64>,
    upper: Vec<f64>,
    params: LpParams,
}

fn prepare(model: &MilpModel, config: &SolverConfig) -> Prepared {
    let sign = match model.objective().sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let n = model.variables().len();
    let mut cost = vec![0.0; n];
    for &(v, c) in &model.objective().terms {
        cost[v.index()] += sign * c;
    }
    let rows = model
        .constraints()
        .iter()
        .map(|c| LpRow {
            terms: c.terms.iter().map(|(v, k)| (v.index(), *k)).collect(),
            sense: c.sense,
            rhs: c.rhs,
        })
        .collect();
    let (lower, upper) = model.variables().iter().map(|v| v.effective_bounds()).unzip();
    Prepared {
        lp: LpData { n, rows, cost },
        lower,
        upper,
        params: LpParams {
            feasibility_tolerance: config.feasibility_tolerance,
            pivot_limit: config.pivot_limit,
            bland_threshold: config.bland_threshold,
        },
    }
}

fn lp_status(s: LpStatus) -> SolveStatus {
    match s {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::Unbounded => SolveStatus::Unbounded,
        LpStatus::IterationLimit => SolveStatus::IterationLimit,
    }
}

/// Solves the continuous relaxation: binaries are treated as continuous
/// variables in `[0, 1]`.
pub fn solve_lp(model: &MilpModel, config: &SolverConfig) -> MilpResult {
    let start = Instant::now();
    let p = prepare(model, config);
    let sol = solve_dense(&p.lp, &p.lower, &p.upper, &p.params);
    let status = lp_status(sol.status);
    let optimal = status == SolveStatus::Optimal;
    MilpResult {
        status,
        objective_value: optimal.then(|| model.objective().value(&sol.x)),
        values: optimal.then_some(sol.x),
        stats: SolveStats {
            nodes: 1,
            lp_pivots: sol.pivots,
            wall_time: start.elapsed(),
        },
    }
}

struct Node {
    /// Relaxation value in internal (minimization) units.
    bound: f64,
    depth: usize,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    branch_var: usize,
    /// Relaxation value of the branching variable.
    branch_value: f64,
    warm: Option<WarmStart>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap pops the greatest: lowest bound first, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

/// A fractional node whose solved tableau is still in memory.
struct Live<'a> {
    node: Node,
    engine: LpEngine<'a>,
}

/// Average bound change per unit of rounding, learned from evaluated
/// children, per variable and direction.
struct PseudoCosts {
    sum: [Vec<f64>; 2],
    count: [Vec<u32>; 2],
}

impl PseudoCosts {
    fn new(n: usize) -> Self {
        Self {
            sum: [vec![0.0; n], vec![0.0; n]],
            count: [vec![0; n], vec![0; n]],
        }
    }

    fn record(&mut self, var: usize, up: bool, per_unit: f64) {
        let k = usize::from(up);
        self.sum[k][var] += per_unit;
        self.count[k][var] += 1;
    }

    fn mean_of(&self, k: usize) -> f64 {
        let (s, c) = self.sum[k]
            .iter()
            .zip(&self.count[k])
            .fold((0.0, 0u32), |(s, c), (x, n)| (s + x, c + n));
        if c == 0 {
            1.0
        } else {
            s / f64::from(c)
        }
    }

    fn estimate(&self, var: usize, k: usize, fallback: f64) -> f64 {
        match self.count[k][var] {
            0 => fallback,
            c => self.sum[k][var] / f64::from(c),
        }
    }
}

struct Search<'a> {
    config: &'a SolverConfig,
    binaries: Vec<usize>,
    stats: SolveStats,
    incumbent: Option<(f64, Vec<f64>)>,
    seq: usize,
    pseudo: PseudoCosts,
}

enum Outcome<'a> {
    Pruned,
    Fractional(Box<Live<'a>>),
    Failed(SolveStatus),
}

impl<'a> Search<'a> {
    fn count(&mut self, sol: &LpSolution) {
        self.stats.nodes += 1;
        self.stats.lp_pivots += sol.pivots;
    }

    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            None => f64::INFINITY,
            Some((obj, _)) => {
                let slack = (PRUNE_TOL * obj.abs().max(1.0)).max(self.config.optimality_gap * obj.abs());
                obj - slack
            }
        }
    }

    /// Fractional binary with the best pseudo-cost product score, ties to
    /// the lowest index; `None` when integral.
    fn branching_var(&self, x: &[f64]) -> Option<usize> {
        let tol = self.config.integrality_tolerance;
        let fallback = [self.pseudo.mean_of(0), self.pseudo.mean_of(1)];
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.binaries {
            let f = x[j] - x[j].floor();
            if f <= tol || f >= 1.0 - tol {
                continue;
            }
            let down = (self.pseudo.estimate(j, 0, fallback[0]) * f).max(1e-6);
            let up = (self.pseudo.estimate(j, 1, fallback[1]) * (1.0 - f)).max(1e-6);
            let score = down * up;
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Classifies a solved node. `parent` is `(bound, var, value, up)` of
    /// the branch that produced it, used to learn pseudo-costs.
    fn classify(
        &mut self,
        sol: LpSolution,
        engine: Option<LpEngine<'a>>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        depth: usize,
        parent: Option<(f64, usize, f64, bool)>,
    ) -> Outcome<'a> {
        self.count(&sol);
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Outcome::Pruned,
            other => return Outcome::Failed(lp_status(other)),
        }
        if let Some((bound, var, value, up)) = parent {
            let dist = if up { value.ceil() - value } else { value - value.floor() };
            if dist > 0.0 {
                self.pseudo.record(var, up, (sol.objective - bound).max(0.0) / dist);
            }
        }
        if sol.objective >= self.cutoff() {
            return Outcome::Pruned;
        }
        let engine = engine.expect("optimal solves keep their engine");
        match self.branching_var(&sol.x) {
            Some(var) => {
                self.seq += 1;
                Outcome::Fractional(Box::new(Live {
                    node: Node {
                        bound: sol.objective,
                        depth,
                        seq: self.seq,
                        lower,
                        upper,
                        branch_var: var,
                        branch_value: sol.x[var],
                        warm: sol.warm,
                    },
                    engine,
                }))
            }
            None => {
                self.accept(sol, engine, &lower, &upper);
                Outcome::Pruned
            }
        }
    }

    /// Re-solves with every binary pinned to its rounded value so the stored
    /// incumbent is exactly integral, then keeps it if it improves.
    fn accept(&mut self, sol: LpSolution, engine: LpEngine<'a>, lower: &[f64], upper: &[f64]) {
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        for &j in &self.binaries {
            let r = sol.x[j].round();
            lo[j] = r;
            hi[j] = r;
        }
        let (polished, _) = engine.resolve(&lo, &hi);
        self.count(&polished);
        let (obj, mut x) = if polished.status == LpStatus::Optimal {
            (polished.objective, polished.x)
        } else {
            (sol.objective, sol.x)
        };
        for &j in &self.binaries {
            x[j] = lo[j];
        }
        let better = match &self.incumbent {
            None => true,
            Some((best, _)) => obj < *best - 1e-12 * best.abs().max(1.0),
        };
        if better {
            log::trace!("incumbent {obj} at node {}", self.stats.nodes);
            self.incumbent = Some((obj, x));
        }
    }

    /// Solves both children of `live`, returning the fractional ones.
    fn branch(&mut self, live: Live<'a>) -> Result<Vec<Live<'a>>, SolveStatus> {
        let Live { node, engine } = live;
        let j = node.branch_var;
        let mut spare = Some(engine.clone());
        let mut engine = Some(engine);
        let mut out = Vec::with_capacity(2);
        for value in [0.0, 1.0] {
            let mut lo = node.lower.clone();
            let mut hi = node.upper.clone();
            lo[j] = value;
            hi[j] = value;
            let e = if value == 0.0 { spare.take() } else { engine.take() }.expect("one engine per child");
            let (sol, e) = e.resolve(&lo, &hi);
            let parent = (node.bound, j, node.branch_value, value == 1.0);
            match self.classify(sol, e, lo, hi, node.depth + 1, Some(parent)) {
                Outcome::Pruned => {}
                Outcome::Failed(status) => return Err(status),
                Outcome::Fractional(child) => out.push(*child),
            }
        }
        Ok(out)
    }
}

/// Globally optimal solution over the binaries, up to the configured
/// tolerances. Deterministic for identical model and config.
///
/// Nodes are explored best-bound first. After branching, the search plunges
/// into the better child with its tableau still in memory and parks the
/// other; parked nodes are restarted from their stored basis.
pub fn solve(model: &MilpModel, config: &SolverConfig) -> MilpResult {
    solve_with(model, config, &SolveHints::default())
}

/// Optional knowledge about a model that speeds up [`solve_with`] without
/// changing its answer, provided the hints are true.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveHints<'a> {
    /// A known assignment. Its binaries are rounded and fixed, the continuous
    /// variables re-optimized, and the result becomes the first incumbent if
    /// that LP is feasible. A start of the wrong length or an infeasible one
    /// is ignored.
    pub start: Option<&'a [f64]>,
    /// A proven bound on the optimum: a lower bound when minimizing, an upper
    /// bound when maximizing. The search stops once an incumbent reaches it.
    pub objective_bound: Option<f64>,
}

/// [`solve`] with hints.
pub fn solve_with(model: &MilpModel, config: &SolverConfig, hints: &SolveHints<'_>) -> MilpResult {
    let start = Instant::now();
    let deadline = config.time_limit().map(|d| start + d);
    let p = prepare(model, config);
    let mut s = Search {
        config,
        binaries: model.binary_vars().iter().map(|v| v.index()).collect(),
        stats: SolveStats::default(),
        incumbent: None,
        seq: 0,
        pseudo: PseudoCosts::new(model.variables().len()),
    };

    let sign = match model.objective().sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let floor = hints.objective_bound.map_or(f64::NEG_INFINITY, |b| sign * b);
    let reached = |s: &Search<'_>| {
        s.incumbent
            .as_ref()
            .is_some_and(|(obj, _)| *obj <= floor + PRUNE_TOL * floor.abs().max(1.0))
    };

    if let Some(x) = hints.start.filter(|x| x.len() == p.lower.len()) {
        let mut lo = p.lower.clone();
        let mut hi = p.upper.clone();
        for &j in &s.binaries {
            let r = x[j].round().clamp(lo[j], hi[j]);
            lo[j] = r;
            hi[j] = r;
        }
        let (sol, _) = LpEngine::start(&p.lp, &lo, &hi, &p.params, None);
        s.count(&sol);
        if sol.status == LpStatus::Optimal {
            let mut x = sol.x;
            for &j in &s.binaries {
                x[j] = lo[j];
            }
            s.incumbent = Some((sol.objective, x));
        }
    }

    let (sol, engine) = LpEngine::start(&p.lp, &p.lower, &p.upper, &p.params, None);
    let mut current = match s.classify(sol, engine, p.lower.clone(), p.upper.clone(), 0, None) {
        Outcome::Pruned => None,
        Outcome::Failed(status) => return finish(model, s.stats, s.incumbent, status, start),
        Outcome::Fractional(live) => Some(*live),
    };
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut limited = false;

    loop {
        if reached(&s) {
            break;
        }
        let live = match current.take() {
            Some(live) if live.node.bound < s.cutoff() => live,
            _ => {
                let Some(node) = heap.pop() else { break };
                if node.bound >= s.cutoff() {
                    break;
                }
                let (sol, engine) = LpEngine::start(&p.lp, &node.lower, &node.upper, &p.params, node.warm.as_ref());
                s.count(&sol);
                match (sol.status, engine) {
                    (LpStatus::Optimal, Some(engine)) => Live {
                        node: Node {
                            bound: node.bound.max(sol.objective),
                            ..node
                        },
                        engine,
                    },
                    _ => {
                        limited = true;
                        break;
                    }
                }
            }
        };
        if s.stats.nodes >= config.node_limit || deadline.is_some_and(|d| Instant::now() >= d) {
            limited = true;
            break;
        }
        let mut children = match s.branch(live) {
            Ok(c) => c,
            Err(_) => {
                limited = true;
                break;
            }
        };
        children.sort_by(|a, b| a.node.bound.total_cmp(&b.node.bound));
        let mut children = children.into_iter();
        current = children.next();
        for parked in children {
            heap.push(parked.node);
        }
    }

    let status = if limited {
        SolveStatus::IterationLimit
    } else if s.incumbent.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    };
    finish(model, s.stats, s.incumbent, status, start)
}

fn finish(
    model: &MilpModel,
    mut stats: SolveStats,
    incumbent: Option<(f64, Vec<f64>)>,
    status: SolveStatus,
    start: Instant,
) -> MilpResult {
    stats.wall_time = start.elapsed();
    match (status, incumbent) {
        (SolveStatus::Optimal | SolveStatus::IterationLimit, Some((_, x))) => MilpResult {
            status,
            objective_value: Some(model.objective().value(&x)),
            values: Some(x),
            stats,
        },
        _ => MilpResult {
            status,
            objective_value: None,
            values: None,
            stats,
        },
    }
}
