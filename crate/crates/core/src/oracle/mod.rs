//! Brute-force ground truth for small networks. Nothing here touches the
//! MILP solver: with the open set fixed, the fixed-charge problem is a plain
//! min-cost flow, solved by successive shortest paths.

mod mcf;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mcf::MinCostFlow;

use crate::network::{validate_network, FlowNetwork, FlowSolution, Violation};

/// Default largest edge count `brute_force_front` accepts.
pub const DEFAULT_EDGE_CAP: usize = 15;
/// Largest number of free edges `optimal_repair` will enumerate over.
pub const REPAIR_ENUMERATION_CAP: usize = 20;
/// Absolute cost tolerance for dominance comparisons.
pub const DOMINANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("network has {edges} edges, oracle cap is {cap}")]
    TooLarge { edges: usize, cap: usize },
    #[error("invalid network: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidNetwork(Vec<Violation>),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
}

/// One non-dominated (initial cost, repaired cost) pair with the initial open
/// set that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OraclePair {
    pub initial_cost: f64,
    pub repaired_cost: f64,
    pub open: BTreeSet<String>,
}

/// Non-dominated pairs sorted by increasing initial cost (so by decreasing
/// repaired cost).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleFront {
    pub pairs: Vec<OraclePair>,
}

impl OracleFront {
    pub fn costs(&self) -> Vec<(f64, f64)> {
        self.pairs.iter().map(|p| (p.initial_cost, p.repaired_cost)).collect()
    }

    /// Smallest drop in repaired cost between neighbouring pairs; `None` for
    /// a single-pair front.
    pub fn min_repaired_gap(&self) -> Option<f64> {
        self.pairs
            .windows(2)
            .map(|w| w[0].repaired_cost - w[1].repaired_cost)
            .min_by(f64::total_cmp)
    }
}

/// Keeps the pairs no other pair beats in both coordinates (ties within
/// [`DOMINANCE_TOLERANCE`] count as equal). Sorted by initial cost; among
/// duplicates the first occurrence in input order survives.
pub fn dominance_filter<T>(mut items: Vec<(f64, f64, T)>) -> Vec<(f64, f64, T)> {
    // Stable sort keeps input order among exact ties.
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64, T)> = Vec::new();
    for it in items {
        match out.last() {
            Some(last) if it.1 >= last.1 - DOMINANCE_TOLERANCE => continue,
            _ => out.push(it),
        }
    }
    out
}

fn check(net: &FlowNetwork) -> Result<(), OracleError> {
    let v = validate_network(net);
    if v.is_empty() {
        Ok(())
    } else {
        Err(OracleError::InvalidNetwork(v))
    }
}

/// Routes the target over the edges selected by `usable`, minimizing variable
/// cost. Returns the variable cost and edge-aligned flows.
fn route(net: &FlowNetwork, usable: impl Fn(usize) -> bool) -> Option<(f64, Vec<f64>)> {
    let mut g = MinCostFlow::new(net.vertices().len());
    let endpoints = net.endpoints();
    let mut handles = Vec::new();
    for (i, e) in net.edges().iter().enumerate() {
        if usable(i) {
            let (u, v) = endpoints[i];
            handles.push((i, g.add_edge(u, v, e.capacity, e.variable_cost)));
        }
    }
    let cost = g.run(net.source_index(), net.sink_index(), net.target())?;
    let mut flow = vec![0.0; net.edges().len()];
    for (i, k) in handles {
        flow[i] = g.flow(k);
    }
    Some((cost, flow))
}

/// Cheapest flow of value target using only `open` (minus the failable edge
/// when `exclude_failable`). Its cost includes fixed charges for all of
/// `open`, used or not. `None` when the target cannot be routed.
pub fn min_cost_flow_fixed_open(
    net: &FlowNetwork,
    open: &BTreeSet<String>,
    exclude_failable: bool,
) -> Result<Option<FlowSolution>, OracleError> {
    check(net)?;
    let mut is_open = vec![false; net.edges().len()];
    for id in open {
        let i = net.edge_position(id).ok_or_else(|| OracleError::UnknownEdge(id.clone()))?;
        is_open[i] = true;
    }
    let w = net.failable_index();
    let routed = route(net, |i| is_open[i] && !(exclude_failable && i == w));
    Ok(routed.map(|(_, flow)| FlowSolution::from_edge_vectors(net, &flow, &is_open)))
}

/// Cheapest repair of `initial`: every edge it opened stays paid for, the
/// failable edge carries nothing, and any further edge may be opened at its
/// fixed charge. Enumerates the supplemental open sets. `None` when the
/// network without the failable edge cannot carry the target.
pub fn optimal_repair(net: &FlowNetwork, initial: &FlowSolution) -> Result<Option<FlowSolution>, OracleError> {
    check(net)?;
    let m = net.edges().len();
    let mut base = vec![false; m];
    for id in &initial.open {
        let i = net.edge_position(id).ok_or_else(|| OracleError::UnknownEdge(id.clone()))?;
        base[i] = true;
    }
    let w = net.failable_index();
    let free: Vec<usize> = (0..m).filter(|&i| !base[i] && i != w).collect();
    if free.len() > REPAIR_ENUMERATION_CAP {
        return Err(OracleError::TooLarge {
            edges: free.len(),
            cap: REPAIR_ENUMERATION_CAP,
        });
    }
    let mut best: Option<(f64, Vec<f64>, Vec<bool>)> = None;
    for sub in 0u32..(1 << free.len()) {
        let mut open = base.clone();
        let mut extra = 0.0;
        for (b, &i) in free.iter().enumerate() {
            if sub >> b & 1 == 1 {
                open[i] = true;
                extra += net.edge(i).fixed_cost;
            }
        }
        if best.as_ref().is_some_and(|(c, _, _)| extra >= *c) {
            continue;
        }
        if let Some((var, flow)) = route(net, |i| open[i] && i != w) {
            let c = extra + var;
            if best.as_ref().is_none_or(|(bc, _, _)| c < *bc) {
                best = Some((c, flow, open));
            }
        }
    }
    Ok(best.map(|(_, flow, open)| FlowSolution::from_edge_vectors(net, &flow, &open)))
}

/// Cost of [`optimal_repair`].
pub fn optimal_repair_cost(net: &FlowNetwork, initial: &FlowSolution) -> Result<Option<f64>, OracleError> {
    Ok(optimal_repair(net, initial)?.map(|s| s.cost))
}

fn mask_ids(net: &FlowNetwork, mask: usize) -> BTreeSet<String> {
    (0..net.edges().len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| net.edge(i).id.clone())
        .collect()
}

/// Per open set `mask`: fixed charges of the set plus cheapest routing over
/// it (infinite if the target does not fit).
fn open_set_costs(net: &FlowNetwork) -> Vec<f64> {
    let m = net.edges().len();
    let endpoints = net.endpoints();
    let (s, t) = (net.source_index(), net.sink_index());
    let target = net.target();
    let slack = 1e-9 * target.max(1.0);
    let mut costs = vec![f64::INFINITY; 1 << m];
    for (mask, cost) in costs.iter_mut().enumerate() {
        let mut fixed = 0.0;
        let (mut out_s, mut in_t) = (0.0, 0.0);
        for (i, e) in net.edges().iter().enumerate() {
            if mask >> i & 1 == 1 {
                fixed += e.fixed_cost;
                if endpoints[i].0 == s {
                    out_s += e.capacity;
                }
                if endpoints[i].1 == t {
                    in_t += e.capacity;
                }
            }
        }
        if out_s < target - slack || in_t < target - slack {
            continue;
        }
        if let Some((var, _)) = route(net, |i| mask >> i & 1 == 1) {
            *cost = fixed + var;
        }
    }
    costs
}

/// [`brute_force_front_with_cap`] with [`DEFAULT_EDGE_CAP`].
pub fn brute_force_front(net: &FlowNetwork) -> Result<OracleFront, OracleError> {
    brute_force_front_with_cap(net, DEFAULT_EDGE_CAP)
}

/// The exact Pareto front over all initial open sets.
///
/// For an initial open set `S` the best initial cost is the cheapest routing
/// over `S` plus its charges. Its best repair keeps `S`'s charges and routes
/// over some superset of `S` without the failable edge, which a superset-min
/// transform over the open-set cost table gives for every `S` at once.
pub fn brute_force_front_with_cap(net: &FlowNetwork, cap: usize) -> Result<OracleFront, OracleError> {
    check(net)?;
    let m = net.edges().len();
    if m > cap {
        return Err(OracleError::TooLarge { edges: m, cap });
    }
    let costs = open_set_costs(net);
    let w = net.failable_index();
    let wbit = 1usize << w;

    let mut sup: Vec<f64> = costs
        .iter()
        .enumerate()
        .map(|(mask, &c)| if mask & wbit == 0 { c } else { f64::INFINITY })
        .collect();
    for b in (0..m).filter(|&b| b != w) {
        let bit = 1 << b;
        for mask in 0..sup.len() {
            if mask & bit == 0 && mask & wbit == 0 && sup[mask | bit] < sup[mask] {
                sup[mask] = sup[mask | bit];
            }
        }
    }

    let wfixed = net.edge(w).fixed_cost;
    let mut candidates = Vec::new();
    for (mask, &initial) in costs.iter().enumerate() {
        if !initial.is_finite() {
            continue;
        }
        let repaired = if mask & wbit != 0 {
            wfixed + sup[mask & !wbit]
        } else {
            sup[mask]
        };
        if repaired.is_finite() {
            candidates.push((initial, repaired, mask));
        }
    }
    let pairs = dominance_filter(candidates)
        .into_iter()
        .map(|(initial_cost, repaired_cost, mask)| OraclePair {
            initial_cost,
            repaired_cost,
            open: mask_ids(net, mask),
        })
        .collect();
    Ok(OracleFront { pairs })
}

/// Cheapest flow cost by open-set enumeration, optionally with the failable
/// edge deleted. `None` when no open set carries the target.
pub fn brute_force_optimum(net: &FlowNetwork, exclude_failable: bool, cap: usize) -> Result<Option<f64>, OracleError> {
    check(net)?;
    let m = net.edges().len();
    if m > cap {
        return Err(OracleError::TooLarge { edges: m, cap });
    }
    let wbit = 1usize << net.failable_index();
    let best = open_set_costs(net)
        .into_iter()
        .enumerate()
        .filter(|(mask, _)| !exclude_failable || mask & wbit == 0)
        .map(|(_, c)| c)
        .min_by(f64::total_cmp)
        .filter(|c| c.is_finite());
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{is_valid_flow, DirectedEdge};

    fn ids(v: &[&str]) -> BTreeSet<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    /// Two disjoint two-edge paths; the failable edge sits on the cheap one.
    fn two_paths() -> FlowNetwork {
        FlowNetwork::new(
            vec!["s".into(), "a".into(), "b".into(), "t".into()],
            vec![
                DirectedEdge::new("sa", "s", "a", 2.0, 1.0, 1.0),
                DirectedEdge::new("at", "a", "t", 2.0, 1.0, 1.0),
                DirectedEdge::new("sb", "s", "b", 2.0, 4.0, 1.0),
                DirectedEdge::new("bt", "b", "t", 2.0, 4.0, 1.0),
            ],
            "s",
            "t",
            2.0,
            "at",
        )
    }

    #[test]
    fn single_edge_open_set() {
        let net = FlowNetwork::new(
            vec!["s".into(), "t".into()],
            vec![DirectedEdge::new("e", "s", "t", 5.0, 3.0, 2.0)],
            "s",
            "t",
            4.0,
            "e",
        );
        let sol = min_cost_flow_fixed_open(&net, &ids(&["e"]), false).unwrap().unwrap();
        assert_eq!(sol.flow_on("e"), 4.0);
        assert_eq!(sol.cost, 11.0);
        assert!(min_cost_flow_fixed_open(&net, &ids(&["e"]), true).unwrap().is_none());
        assert!(min_cost_flow_fixed_open(&net, &BTreeSet::new(), false).unwrap().is_none());
    }

    #[test]
    fn unused_open_edges_are_charged() {
        let net = two_paths();
        let sol = min_cost_flow_fixed_open(&net, &ids(&["sa", "at", "sb"]), false)
            .unwrap()
            .unwrap();
        assert_eq!(sol.cost, 2.0 + 4.0 + 4.0);
        assert!(sol.open.contains("sb"));
        assert!(is_valid_flow(&net, &sol, false));
    }

    #[test]
    fn repair_of_flow_avoiding_failure_is_itself() {
        let net = two_paths();
        let initial = min_cost_flow_fixed_open(&net, &ids(&["sb", "bt"]), false).unwrap().unwrap();
        assert_eq!(optimal_repair_cost(&net, &initial).unwrap(), Some(initial.cost));
    }

    #[test]
    fn repair_of_bridge_flow_pays_both_routes() {
        let net = two_paths();
        let initial = min_cost_flow_fixed_open(&net, &ids(&["sa", "at"]), false).unwrap().unwrap();
        assert_eq!(initial.cost, 6.0);
        let repair = optimal_repair(&net, &initial).unwrap().unwrap();
        assert_eq!(repair.cost, 2.0 + 12.0);
        assert!(is_valid_flow(&net, &repair, true));
        assert!(repair.open.is_superset(&initial.open));
    }

    #[test]
    fn two_disjoint_paths_front() {
        let front = brute_force_front(&two_paths()).unwrap();
        assert_eq!(front.costs(), vec![(6.0, 14.0), (12.0, 12.0)]);
        assert_eq!(front.pairs[0].open, ids(&["at", "sa"]));
        assert_eq!(front.min_repaired_gap(), Some(2.0));
    }

    #[test]
    fn single_path_front_has_one_pair() {
        let net = FlowNetwork::new(
            vec!["s".into(), "m".into(), "t".into()],
            vec![
                DirectedEdge::new("sm", "s", "m", 1.0, 1.0, 0.0),
                DirectedEdge::new("mt", "m", "t", 1.0, 1.0, 0.0),
                DirectedEdge::new("sx", "s", "t", 1.0, 9.0, 0.0),
            ],
            "s",
            "t",
            1.0,
            "sx",
        );
        let front = brute_force_front(&net).unwrap();
        assert_eq!(front.costs(), vec![(2.0, 2.0)]);
        assert_eq!(front.min_repaired_gap(), None);
    }

    #[test]
    fn superset_transform_agrees_with_repair_enumeration() {
        let net = two_paths();
        let costs = open_set_costs(&net);
        let front = brute_force_front(&net).unwrap();
        for p in &front.pairs {
            let initial = min_cost_flow_fixed_open(&net, &p.open, false).unwrap().unwrap();
            assert_eq!(initial.cost, p.initial_cost);
            assert_eq!(optimal_repair_cost(&net, &initial).unwrap(), Some(p.repaired_cost));
        }
        assert_eq!(costs.len(), 16);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            brute_force_front_with_cap(&two_paths(), 3),
            Err(OracleError::TooLarge { edges: 4, cap: 3 })
        ));
    }

    #[test]
    fn optimum_with_and_without_failure() {
        let net = two_paths();
        assert_eq!(brute_force_optimum(&net, false, 15).unwrap(), Some(6.0));
        assert_eq!(brute_force_optimum(&net, true, 15).unwrap(), Some(12.0));
    }

    #[test]
    fn dominance_filter_drops_weak_pairs() {
        let kept = dominance_filter(vec![(3.0, 3.0, 'a'), (1.0, 5.0, 'b'), (2.0, 5.0, 'c'), (3.0, 3.0, 'd'), (4.0, 1.0, 'e')]);
        let tags: Vec<char> = kept.iter().map(|k| k.2).collect();
        assert_eq!(tags, vec!['b', 'a', 'e']);
    }
}
