//! Seeded synthetic instances. None of these are real data: the
//! "Nevada-like" generator only mimics the shape of a regional study (21
//! capture sources, 3 storage sinks, a sparse pipeline candidate network).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CidInstance, Pipe, Site};

pub const SYNTHETIC_LABEL: &str = "synthetic";

#[derive(Debug, Clone, PartialEq)]
pub struct NevadaLikeParams {
    pub sources: usize,
    pub sinks: usize,
    /// Non-tree links added to the spanning tree of candidate pipes.
    pub extra_links: usize,
    /// Flow units per year, e.g. Mt CO2.
    pub target: f64,
    pub project_years: u32,
    pub sink_capacity: f64,
    pub pipe_capacity: f64,
}

impl Default for NevadaLikeParams {
    fn default() -> Self {
        Self {
            sources: 21,
            sinks: 3,
            extra_links: 4,
            target: 8.0,
            project_years: 20,
            sink_capacity: 5.0,
            pipe_capacity: 10.0,
        }
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    // Rough km per degree at these latitudes.
    let dx = (a[0] - b[0]) * 85.0;
    let dy = (a[1] - b[1]) * 111.0;
    (dx * dx + dy * dy).sqrt()
}

/// A synthetic regional instance. Capture has no fixed cost; storage costs
/// are the same at every sink; `sink-2` is the southernmost sink and is the
/// one that may fail. Candidate pipes run both ways along a minimum spanning
/// tree of the sites plus the shortest extra links. Costs are in millions per
/// flow unit (variable) and millions (fixed), not yet annualized.
pub fn nevada_like(seed: u64, params: &NevadaLikeParams) -> CidInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coordinates = BTreeMap::new();
    let mut points = Vec::new();

    let mut sources = Vec::with_capacity(params.sources);
    for k in 1..=params.sources {
        let id = format!("source-{k}");
        let at = [rng.gen_range(-120.0..-114.0), rng.gen_range(35.0..42.0)];
        sources.push(Site {
            id: id.clone(),
            capacity: (rng.gen_range(0.2..1.2_f64) * 100.0).round() / 100.0,
            fixed_cost: 0.0,
            variable_cost: rng.gen_range(30.0..80.0_f64).round(),
        });
        coordinates.insert(id.clone(), at);
        points.push((id, at));
    }
    let supply: f64 = sources.iter().map(|s| s.capacity).sum();
    if supply < 1.25 * params.target {
        let k = 1.25 * params.target / supply;
        for s in &mut sources {
            s.capacity = (s.capacity * k * 100.0).ceil() / 100.0;
        }
    }

    let mut lats: Vec<f64> = (0..params.sinks).map(|_| rng.gen_range(35.0..42.0)).collect();
    lats.sort_by(|a, b| b.total_cmp(a));
    if params.sinks >= 2 {
        // sink-2 takes the southernmost latitude.
        let south = lats.pop().expect("at least two sinks");
        lats.insert(1, south);
    }
    let mut sinks = Vec::with_capacity(params.sinks);
    for (k, lat) in lats.into_iter().enumerate() {
        let id = format!("sink-{}", k + 1);
        let at = [rng.gen_range(-120.0..-114.0), lat];
        sinks.push(Site {
            id: id.clone(),
            capacity: params.sink_capacity,
            fixed_cost: 50.0,
            variable_cost: 8.0,
        });
        coordinates.insert(id.clone(), at);
        points.push((id, at));
    }

    // Prim's algorithm over the complete distance graph.
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, 0usize); n];
    let mut links = Vec::new();
    in_tree[0] = true;
    for j in 1..n {
        best[j] = (distance(points[0].1, points[j].1), 0);
    }
    for _ in 1..n {
        let j = (0..n)
            .filter(|&j| !in_tree[j])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0))
            .expect("vertices remain");
        in_tree[j] = true;
        links.push((best[j].1.min(j), best[j].1.max(j)));
        for k in 0..n {
            let d = distance(points[j].1, points[k].1);
            if !in_tree[k] && d < best[k].0 {
                best[k] = (d, j);
            }
        }
    }
    let mut others: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .filter(|l| !links.contains(l))
        .map(|(a, b)| (distance(points[a].1, points[b].1), a, b))
        .collect();
    others.sort_by(|x, y| x.0.total_cmp(&y.0));
    links.extend(others.iter().take(params.extra_links).map(|&(_, a, b)| (a, b)));
    links.sort_unstable();

    let mut pipes = Vec::with_capacity(2 * links.len());
    for (a, b) in links {
        let km = distance(points[a].1, points[b].1);
        for (from, to) in [(a, b), (b, a)] {
            pipes.push(Pipe {
                id: format!("pipe:{}>{}", points[from].0, points[to].0),
                from: points[from].0.clone(),
                to: points[to].0.clone(),
                capacity: params.pipe_capacity,
                fixed_cost: (0.8 * km).round(),
                variable_cost: (0.01 * km * 100.0).round() / 100.0,
            });
        }
    }

    CidInstance {
        label: Some(format!("{SYNTHETIC_LABEL} nevada-like instance, seed {seed}")),
        sources,
        sinks,
        junctions: Vec::new(),
        pipes,
        target: params.target,
        failable_sink: if params.sinks >= 2 { "sink-2" } else { "sink-1" }.to_string(),
        project_years: params.project_years,
        coordinates,
    }
}

/// Shape of small random instances; ranges are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomCidParams {
    pub sources: (usize, usize),
    pub sinks: (usize, usize),
    pub junctions: (usize, usize),
    pub pipes: (usize, usize),
    pub target: (u32, u32),
}

impl Default for RandomCidParams {
    fn default() -> Self {
        Self {
            sources: (1, 3),
            sinks: (1, 3),
            junctions: (0, 2),
            pipes: (2, 5),
            target: (1, 3),
        }
    }
}

fn site<R: Rng>(rng: &mut R, id: String) -> Site {
    Site {
        id,
        capacity: rng.gen_range(1..=4) as f64,
        fixed_cost: rng.gen_range(0..=10) as f64,
        variable_cost: rng.gen_range(0..=5) as f64,
    }
}

/// A small random instance with integer data whose site capacities cover the
/// target. Routing feasibility is not guaranteed.
pub fn random_cid<R: Rng>(rng: &mut R, p: &RandomCidParams) -> CidInstance {
    loop {
        let target = rng.gen_range(p.target.0..=p.target.1) as f64;
        let sources: Vec<Site> = (1..=rng.gen_range(p.sources.0..=p.sources.1))
            .map(|k| site(rng, format!("src{k}")))
            .collect();
        let sinks: Vec<Site> = (1..=rng.gen_range(p.sinks.0..=p.sinks.1))
            .map(|k| site(rng, format!("snk{k}")))
            .collect();
        if sources.iter().map(|s| s.capacity).sum::<f64>() < target
            || sinks.iter().map(|s| s.capacity).sum::<f64>() < target
        {
            continue;
        }
        let junctions: Vec<String> = (1..=rng.gen_range(p.junctions.0..=p.junctions.1))
            .map(|k| format!("j{k}"))
            .collect();
        let vertices: Vec<String> = sources
            .iter()
            .map(|s| s.id.clone())
            .chain(junctions.iter().cloned())
            .chain(sinks.iter().map(|s| s.id.clone()))
            .collect();
        let mut pairs: Vec<(usize, usize)> = (0..vertices.len())
            .flat_map(|a| (0..vertices.len()).map(move |b| (a, b)))
            .filter(|(a, b)| a != b)
            .collect();
        pairs.shuffle(rng);
        let m = rng.gen_range(p.pipes.0..=p.pipes.1).min(pairs.len());
        pairs.truncate(m);
        pairs.sort_unstable();
        let pipes = pairs
            .into_iter()
            .enumerate()
            .map(|(k, (a, b))| Pipe {
                id: format!("pipe{}", k + 1),
                from: vertices[a].clone(),
                to: vertices[b].clone(),
                capacity: rng.gen_range(1..=4) as f64,
                fixed_cost: rng.gen_range(1..=15) as f64,
                variable_cost: rng.gen_range(0..=3) as f64,
            })
            .collect();
        let failable_sink = sinks.choose(rng).expect("at least one sink").id.clone();
        return CidInstance {
            label: Some(format!("{SYNTHETIC_LABEL} random instance")),
            sources,
            sinks,
            junctions,
            pipes,
            target,
            failable_sink,
            project_years: rng.gen_range(1..=3),
            coordinates: BTreeMap::new(),
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs::{parse_cid, reduce_cid_to_fcnf, validate_cid};

    #[test]
    fn nevada_like_shape() {
        let cid = nevada_like(1, &NevadaLikeParams::default());
        assert!(validate_cid(&cid).is_empty(), "{:?}", validate_cid(&cid));
        assert_eq!(cid.sources.len(), 21);
        assert_eq!(cid.sinks.len(), 3);
        assert!(cid.label.as_deref().unwrap().starts_with("synthetic"));
        assert!(cid.sources.iter().all(|s| s.fixed_cost == 0.0));
        assert!(cid.sinks.windows(2).all(|w| w[0].fixed_cost == w[1].fixed_cost && w[0].variable_cost == w[1].variable_cost));
        let south = cid.coordinates["sink-2"][1];
        assert!(cid.sinks.iter().all(|s| cid.coordinates[&s.id][1] >= south));
        assert_eq!(cid.failable_sink, "sink-2");
        let supply: f64 = cid.sources.iter().map(|s| s.capacity).sum();
        assert!(supply >= cid.target);
        let reparsed = parse_cid(&cid.to_json_string()).unwrap();
        assert_eq!(reparsed, cid);
        let net = reduce_cid_to_fcnf(&cid).network;
        assert_eq!(net.failable_edge(), "storage:sink-2");
    }

    #[test]
    fn random_cids_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let cid = random_cid(&mut rng, &RandomCidParams::default());
            assert!(validate_cid(&cid).is_empty(), "{:?}", validate_cid(&cid));
            let net = reduce_cid_to_fcnf(&cid).network;
            assert!(crate::network::validate_network(&net).is_empty());
        }
    }
}
