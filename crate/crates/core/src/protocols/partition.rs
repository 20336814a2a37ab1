//! β-outdegree partition oracle.
//!
//! Splits a graph into k = ⌈Δ/β⌉ classes so that each class, with edges
//! oriented from later-assigned to earlier-assigned vertices, has
//! out-degree at most β. Computed centrally; the nominal distributed cost
//! (k plus a log*-type term for the symmetry breaking it replaces) is
//! recorded as `charged_rounds`.

use serde::Serialize;

use crate::graph::Graph;
use crate::protocols::ProtocolError;

#[derive(Debug, Clone, Serialize)]
pub struct PartitionResult {
    pub beta: u64,
    /// Class count k = ⌈Δ/β⌉ (at least 1).
    pub k: usize,
    /// Class of each vertex.
    pub class_of: Vec<usize>,
    /// Classes as vertex sets, each in assignment (= id) order.
    pub parts: Vec<Vec<usize>>,
    /// Intra-class out-neighbors per vertex (later-assigned vertex points
    /// to earlier-assigned).
    pub out_neighbors: Vec<Vec<usize>>,
    pub charged_rounds: u64,
}

impl PartitionResult {
    pub fn max_out_degree(&self) -> usize {
        self.out_neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Re-checks the structural guarantees; used by tests and by the
    /// pipeline after every call.
    pub fn validate(&self, graph: &Graph) -> Result<(), ProtocolError> {
        if self.class_of.len() != graph.n() {
            return Err(ProtocolError::Invalid("partition covers wrong vertex count".into()));
        }
        let mut seen = vec![false; graph.n()];
        for (index, part) in self.parts.iter().enumerate() {
            for &v in part {
                if self.class_of[v] != index || seen[v] {
                    return Err(ProtocolError::Invalid(format!(
                        "vertex {v} misfiled in class {index}"
                    )));
                }
                seen[v] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(ProtocolError::Invalid("partition misses vertices".into()));
        }
        // Orientation covers exactly the intra-class edges, within budget.
        let mut oriented = 0usize;
        for (v, outs) in self.out_neighbors.iter().enumerate() {
            if outs.len() as u64 > self.beta {
                return Err(ProtocolError::OutDegreeExceedsBeta {
                    vertex: v,
                    out_degree: outs.len(),
                    beta: self.beta,
                });
            }
            for &u in outs {
                if self.class_of[u] != self.class_of[v] || u >= v {
                    return Err(ProtocolError::Invalid(format!(
                        "bad orientation edge {v} -> {u}"
                    )));
                }
                oriented += 1;
            }
        }
        let intra = graph
            .edges()
            .iter()
            .filter(|&&(u, v)| self.class_of[u] == self.class_of[v])
            .count();
        if oriented != intra {
            return Err(ProtocolError::Invalid(format!(
                "orientation covers {oriented} of {intra} intra-class edges"
            )));
        }
        Ok(())
    }
}

/// Iterations of log₂ until the value drops to at most 1.
pub fn log2_star(mut x: f64) -> u64 {
    let mut steps = 0;
    while x > 1.0 {
        x = x.log2();
        steps += 1;
    }
    steps
}

/// Greedy partition: vertices in id order join the class currently holding
/// the fewest of their already-assigned neighbors (ties: lowest class).
/// Every vertex then has at most ⌊Δ/k⌋ ≤ β earlier-assigned neighbors in
/// its own class, which is exactly its out-degree under the
/// later-to-earlier orientation.
pub fn low_outdegree_partition(graph: &Graph, beta: u64) -> Result<PartitionResult, ProtocolError> {
    if beta == 0 {
        return Err(ProtocolError::Invalid("beta must be at least 1".into()));
    }
    let n = graph.n();
    let delta = graph.max_degree() as u64;
    let k = usize::try_from(delta.div_ceil(beta).max(1)).unwrap();

    let mut class_of = vec![usize::MAX; n];
    let mut parts: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut out_neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let mut counts = vec![0usize; k];
        for &u in graph.neighbors(v) {
            if u < v {
                counts[class_of[u]] += 1;
            }
        }
        let class = (0..k).min_by_key(|&c| (counts[c], c)).unwrap();
        class_of[v] = class;
        parts[class].push(v);
        for &u in graph.neighbors(v) {
            if u < v && class_of[u] == class {
                out_neighbors[v].push(u);
            }
        }
    }

    let charged_rounds = k as u64 + log2_star(f64::from(graph.m()));
    let result =
        PartitionResult { beta, k, class_of, parts, out_neighbors, charged_rounds };
    result.validate(graph)?;
    Ok(result)
}
