//! Successive-shortest-path min-cost flow with Dijkstra on reduced costs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Flow amounts below this are treated as zero residual capacity.
const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct Arc {
    to: usize,
    cap: f64,
    cost: f64,
}

/// Residual graph where arc `2k` is the forward copy of input edge `k` and
/// arc `2k + 1` its reverse.
#[derive(Debug, Clone)]
pub struct MinCostFlow {
    n: usize,
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

#[derive(Debug, PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl MinCostFlow {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            arcs: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Adds a directed edge; returns its index for [`MinCostFlow::flow`].
    /// Costs must be nonnegative.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> usize {
        debug_assert!(cost >= 0.0);
        let k = self.arcs.len() / 2;
        self.adj[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap, cost });
        self.adj[to].push(self.arcs.len());
        self.arcs.push(Arc { to: from, cap: 0.0, cost: -cost });
        k
    }

    /// Flow currently on input edge `k`.
    pub fn flow(&self, k: usize) -> f64 {
        self.arcs[2 * k + 1].cap
    }

    /// Sends `amount` from `s` to `t` along successive cheapest residual
    /// paths. Returns the variable cost, or `None` when the network cannot
    /// carry `amount`.
    pub fn run(&mut self, s: usize, t: usize, amount: f64) -> Option<f64> {
        let tol = 1e-9 * amount.max(1.0);
        let mut potential = vec![0.0; self.n];
        let mut remaining = amount;
        let mut cost = 0.0;
        while remaining > tol {
            let (dist, pred) = self.dijkstra(s, &potential);
            if !dist[t].is_finite() {
                return None;
            }
            for v in 0..self.n {
                if dist[v].is_finite() {
                    potential[v] += dist[v];
                }
            }
            let mut push = remaining;
            let mut v = t;
            while v != s {
                let a = pred[v].expect("reachable vertex has a predecessor");
                push = push.min(self.arcs[a].cap);
                v = self.arcs[a ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let a = pred[v].unwrap();
                self.arcs[a].cap -= push;
                self.arcs[a ^ 1].cap += push;
                cost += push * self.arcs[a].cost;
                v = self.arcs[a ^ 1].to;
            }
            remaining -= push;
        }
        Some(cost)
    }

    fn dijkstra(&self, s: usize, potential: &[f64]) -> (Vec<f64>, Vec<Option<usize>>) {
        let mut dist = vec![f64::INFINITY; self.n];
        let mut pred = vec![None; self.n];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        heap.push(Item(0.0, s));
        while let Some(Item(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &a in &self.adj[u] {
                let arc = self.arcs[a];
                if arc.cap <= EPS {
                    continue;
                }
                // Reduced costs are nonnegative up to rounding; clamp the
                // residue so Dijkstra's invariant holds.
                let rc = (arc.cost + potential[u] - potential[arc.to]).max(0.0);
                let nd = d + rc;
                if nd < dist[arc.to] {
                    dist[arc.to] = nd;
                    pred[arc.to] = Some(a);
                    heap.push(Item(nd, arc.to));
                }
            }
        }
        (dist, pred)
    }
}
