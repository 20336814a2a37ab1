//! Seeded synthetic instances: graphs, input colorings, and color lists.
//!
//! Every generator is a pure function of its arguments; the RNG is always
//! a locally constructed ChaCha stream, so equal seeds give equal
//! instances on every platform.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, GraphError};

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cycle 0–1–…–(n−1)–0. Needs n ≥ 3.
pub fn cycle_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|v| (v, (v + 1) % n)).collect()
}

/// Path 0–1–…–(n−1).
pub fn path_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n.saturating_sub(1)).map(|v| (v, v + 1)).collect()
}

/// Random graph with maximum degree capped at `max_degree`: candidate pairs
/// are visited in a seeded random order and kept while both endpoints have
/// spare degree. Dense for small caps, sparse never beyond the cap.
pub fn random_capped_edges(n: usize, max_degree: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = rng_for(seed);
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    pairs.shuffle(&mut rng);
    let mut degree = vec![0usize; n];
    let mut edges = Vec::new();
    for (u, v) in pairs {
        if degree[u] < max_degree && degree[v] < max_degree {
            degree[u] += 1;
            degree[v] += 1;
            edges.push((u, v));
        }
    }
    edges.sort_unstable();
    edges
}

/// Random bipartite graph on `a + b` vertices (left part first), degree
/// capped on both sides. Returns edges plus the 2-coloring psi.
pub fn bipartite_capped(
    a: usize,
    b: usize,
    max_degree: usize,
    seed: u64,
) -> (Vec<(usize, usize)>, Vec<u32>) {
    let mut rng = rng_for(seed);
    let mut pairs: Vec<(usize, usize)> =
        (0..a).flat_map(|u| (0..b).map(move |w| (u, a + w))).collect();
    pairs.shuffle(&mut rng);
    let mut degree = vec![0usize; a + b];
    let mut edges = Vec::new();
    for (u, v) in pairs {
        if degree[u] < max_degree && degree[v] < max_degree {
            degree[u] += 1;
            degree[v] += 1;
            edges.push((u, v));
        }
    }
    edges.sort_unstable();
    let psi = (0..a + b).map(|v| u32::from(v >= a)).collect();
    (edges, psi)
}

/// Identity coloring: psi(v) = v with m = n.
pub fn psi_ids(n: usize) -> (Vec<u32>, u32) {
    ((0..n as u32).collect(), n as u32)
}

/// Proper coloring by the sequential greedy rule (smallest color unused by
/// earlier neighbors); m = number of colors used.
pub fn psi_greedy(n: usize, edges: &[(usize, usize)]) -> (Vec<u32>, u32) {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut psi = vec![u32::MAX; n];
    for v in 0..n {
        let used: Vec<u32> =
            adj[v].iter().filter(|&&u| u < v).map(|&u| psi[u]).collect();
        psi[v] = (0u32..).find(|c| !used.contains(c)).unwrap();
    }
    let m = psi.iter().max().map_or(1, |&c| c + 1);
    (psi, m)
}

/// Builds a graph with greedy proper psi in one call.
pub fn graph_with_greedy_psi(n: usize, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
    let (psi, m) = psi_greedy(n, edges);
    Graph::from_edges(n, edges, psi, m)
}

/// Pairwise-disjoint lists: vertex v gets [v·l0, (v+1)·l0); the colorspace
/// is n·l0.
pub fn disjoint_lists(n: usize, l0: usize) -> (Vec<Vec<u32>>, u64) {
    let lists = (0..n)
        .map(|v| ((v * l0) as u32..((v + 1) * l0) as u32).collect())
        .collect();
    (lists, (n * l0) as u64)
}

/// One shared list [0, l0) for every vertex.
pub fn shared_list(n: usize, l0: usize) -> (Vec<Vec<u32>>, u64) {
    ((0..n).map(|_| (0..l0 as u32).collect()).collect(), l0 as u64)
}

/// Each vertex draws one of `pools` disjoint l0-blocks at random; the
/// colorspace is pools·l0.
pub fn pooled_lists(n: usize, pools: usize, l0: usize, seed: u64) -> (Vec<Vec<u32>>, u64) {
    let mut rng = rng_for(seed);
    let lists = (0..n)
        .map(|_| {
            let p = rng.gen_range(0..pools);
            ((p * l0) as u32..((p + 1) * l0) as u32).collect()
        })
        .collect();
    (lists, (pools * l0) as u64)
}

/// `count` distinct colors sampled uniformly from [0, space), sorted.
pub fn sample_colors(rng: &mut ChaCha8Rng, count: usize, space: u64) -> Vec<u32> {
    debug_assert!(count as u64 <= space && space <= u64::from(u32::MAX) + 1);
    let mut picked: Vec<u32> = rand::seq::index::sample(rng, space as usize, count)
        .into_iter()
        .map(|c| c as u32)
        .collect();
    picked.sort_unstable();
    picked
}

/// Uniform random l0-lists over [0, space).
pub fn random_lists(n: usize, l0: usize, space: u64, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = rng_for(seed);
    (0..n).map(|_| sample_colors(&mut rng, l0, space)).collect()
}

/// Random lists of size deg(v)+1 over [0, space) — the (deg+1) regime.
pub fn deg_plus_one_lists(graph: &Graph, space: u64, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = rng_for(seed);
    (0..graph.n())
        .map(|v| sample_colors(&mut rng, graph.degree(v) + 1, space))
        .collect()
}
