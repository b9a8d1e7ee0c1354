//! Seeded random networks for testing, and the small demo network.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::network::{DirectedEdge, FlowNetwork};
use crate::oracle::MinCostFlow;

/// Shape of random instances. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomNetworkParams {
    pub vertices: (usize, usize),
    pub edges: (usize, usize),
    pub fixed_cost: (u32, u32),
    pub variable_cost: (u32, u32),
    pub targets: Vec<u32>,
    /// Capacities are drawn from `[lo * T, hi * T]`.
    pub capacity_factor: (u32, u32),
}

impl Default for RandomNetworkParams {
    fn default() -> Self {
        Self {
            vertices: (4, 7),
            edges: (6, 10),
            fixed_cost: (1, 20),
            variable_cost: (0, 5),
            targets: vec![1, 2, 3],
            capacity_factor: (1, 3),
        }
    }
}

/// Whether the network minus its failable edge can carry the target.
pub fn survives_failure(net: &FlowNetwork) -> bool {
    let mut g = MinCostFlow::new(net.vertices().len());
    let w = net.failable_index();
    for (i, (e, (u, v))) in net.edges().iter().zip(net.endpoints()).enumerate() {
        if i != w {
            g.add_edge(u, v, e.capacity, 0.0);
        }
    }
    g.run(net.source_index(), net.sink_index(), net.target()).is_some()
}

/// Draws a random simple digraph with source `s`, sink `t` and internal
/// vertices `v1..`, no edges into `s` or out of `t`, and a failable edge whose
/// loss still leaves the target routable. Redraws until that holds.
pub fn random_network<R: Rng>(rng: &mut R, params: &RandomNetworkParams) -> FlowNetwork {
    loop {
        if let Some(net) = draw(rng, params) {
            if survives_failure(&net) {
                return net;
            }
        }
    }
}

/// [`random_network`] with default parameters from a ChaCha8 stream.
pub fn random_network_seeded(seed: u64) -> FlowNetwork {
    random_network(&mut ChaCha8Rng::seed_from_u64(seed), &RandomNetworkParams::default())
}

fn draw<R: Rng>(rng: &mut R, p: &RandomNetworkParams) -> Option<FlowNetwork> {
    let n = rng.gen_range(p.vertices.0..=p.vertices.1);
    let mut names = vec!["s".to_string()];
    names.extend((1..n - 1).map(|k| format!("v{k}")));
    names.push("t".to_string());
    let (s, t) = (0, n - 1);

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && u != t && v != s {
                pairs.push((u, v));
            }
        }
    }
    let m = rng.gen_range(p.edges.0..=p.edges.1).min(pairs.len());
    pairs.shuffle(rng);
    pairs.truncate(m);
    pairs.sort_unstable();

    let target = *p.targets.choose(rng)? as f64;
    let edges: Vec<DirectedEdge> = pairs
        .iter()
        .map(|&(u, v)| {
            let cap = rng.gen_range(p.capacity_factor.0..=p.capacity_factor.1) as f64 * target;
            let cap = if cap == 0.0 { rng.gen_range(1..=3) as f64 } else { cap };
            DirectedEdge::new(
                format!("{}-{}", names[u], names[v]),
                names[u].clone(),
                names[v].clone(),
                cap,
                rng.gen_range(p.fixed_cost.0..=p.fixed_cost.1) as f64,
                rng.gen_range(p.variable_cost.0..=p.variable_cost.1) as f64,
            )
        })
        .collect();
    let failable = edges.choose(rng)?.id.clone();
    Some(FlowNetwork::new(names, edges, "s", "t", target, failable))
}

/// Unit-capacity demo with a four-point front. The failable edge `b-t` is the
/// cheap last hop; hedging against its loss costs progressively more up
/// front.
pub fn demo_network() -> FlowNetwork {
    let e = |tail: &str, head: &str, fixed: f64| DirectedEdge::new(format!("{tail}-{head}"), tail, head, 1.0, fixed, 0.0);
    FlowNetwork::new(
        ["s", "a", "b", "c", "d", "t"].map(String::from).to_vec(),
        vec![
            e("s", "a", 6.0),
            e("a", "d", 2.0),
            e("d", "t", 5.0),
            e("s", "b", 7.0),
            e("b", "t", 2.0),
            e("a", "b", 2.0),
            e("d", "b", 1.0),
            e("b", "c", 2.0),
            e("c", "t", 9.0),
        ],
        "s",
        "t",
        1.0,
        "b-t",
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::validate_network;

    #[test]
    fn random_networks_respect_parameters() {
        let p = RandomNetworkParams::default();
        for seed in 0..200 {
            let net = random_network_seeded(seed);
            assert!(validate_network(&net).is_empty(), "seed {seed}");
            let n = net.vertices().len();
            assert!((p.vertices.0..=p.vertices.1).contains(&n));
            assert!(net.edges().len() <= p.edges.1);
            assert!(net.edges().len() >= p.edges.0.min(7));
            let t = net.target();
            for e in net.edges() {
                assert!(e.capacity >= t && e.capacity <= 3.0 * t);
                assert!((1.0..=20.0).contains(&e.fixed_cost));
                assert!((0.0..=5.0).contains(&e.variable_cost));
                assert_eq!(e.fixed_cost.fract(), 0.0);
            }
            assert!(survives_failure(&net));
        }
    }

    #[test]
    fn same_seed_same_network() {
        assert_eq!(random_network_seeded(7), random_network_seeded(7));
        assert_ne!(random_network_seeded(7), random_network_seeded(8));
    }

    #[test]
    fn demo_is_valid() {
        let net = demo_network();
        assert!(validate_network(&net).is_empty());
        assert!(survives_failure(&net));
        assert!(!survives_failure(&net.with_failable_edge("s-a").with_target(2.0)));
    }
}
