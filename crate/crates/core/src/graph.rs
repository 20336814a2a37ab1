//! Graph data model: simple undirected graphs with an optional edge
//! orientation, an input coloring `psi`, per-vertex color lists, and the
//! validators used by every algorithm in the crate.
//!
//! Vertices are `0..n`. Edges are undirected; an orientation assigns each
//! edge exactly one direction and induces the out/in-neighbor views that the
//! coloring algorithms consume. The input coloring `psi` must be proper: it
//! is the symmetry breaker every protocol relies on.

use std::collections::BTreeSet;

use thiserror::Error;

/// Errors raised while constructing or validating a graph.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge #{index} references vertex {vertex} but n = {n}")]
    VertexOutOfRange { index: usize, vertex: usize, n: usize },
    #[error("edge #{index} is a self-loop at vertex {vertex}")]
    SelfLoop { index: usize, vertex: usize },
    #[error("edge #{index} duplicates edge {{{u}, {v}}}")]
    DuplicateEdge { index: usize, u: usize, v: usize },
    #[error("psi has {got} entries, expected {expected}")]
    PsiLength { got: usize, expected: usize },
    #[error("psi[{vertex}] = {value} is not below m = {m}")]
    PsiOutOfRange { vertex: usize, value: u32, m: u32 },
    #[error("psi is not proper: vertices {u} and {v} are adjacent and share color {color}")]
    PsiNotProper { u: usize, v: usize, color: u32 },
    #[error("orientation directs {{{u}, {v}}} which is not an edge of the graph")]
    OrientationUnknownEdge { u: usize, v: usize },
    #[error("orientation assigns both directions to edge {{{u}, {v}}}")]
    OrientationBothDirections { u: usize, v: usize },
    #[error("orientation leaves edge {{{u}, {v}}} undirected")]
    OrientationMissingEdge { u: usize, v: usize },
}

/// A simple undirected graph with an orientation, a proper input coloring
/// `psi` over `[m]`, and sorted adjacency views.
///
/// Immutable after construction; all derived quantities (max degree, max
/// outdegree) are computed on demand from the stored adjacency.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    psi: Vec<u32>,
    m: u32,
}

impl Graph {
    /// Builds a graph from undirected edges, orienting each edge from the
    /// lower to the higher endpoint.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize)],
        psi: Vec<u32>,
        m: u32,
    ) -> Result<Self, GraphError> {
        let directed: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(u, v)| if u < v { (u, v) } else { (v, u) })
            .collect();
        Self::from_directed_edges(n, &directed, psi, m)
    }

    /// Builds a graph from directed edges: each pair `(u, v)` is an
    /// undirected edge oriented `u -> v`.
    pub fn from_directed_edges(
        n: usize,
        directed: &[(usize, usize)],
        psi: Vec<u32>,
        m: u32,
    ) -> Result<Self, GraphError> {
        let mut seen = BTreeSet::new();
        let mut adj = vec![Vec::new(); n];
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(directed.len());
        for (index, &(u, v)) in directed.iter().enumerate() {
            for &w in &[u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { index, vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { index, vertex: u });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge { index, u: key.0, v: key.1 });
            }
            adj[u].push(v);
            adj[v].push(u);
            out[u].push(v);
            inn[v].push(u);
            edges.push(key);
        }
        for list in adj.iter_mut().chain(out.iter_mut()).chain(inn.iter_mut()) {
            list.sort_unstable();
        }
        edges.sort_unstable();

        if psi.len() != n {
            return Err(GraphError::PsiLength { got: psi.len(), expected: n });
        }
        for (vertex, &value) in psi.iter().enumerate() {
            if value >= m {
                return Err(GraphError::PsiOutOfRange { vertex, value, m });
            }
        }
        for &(u, v) in &edges {
            if psi[u] == psi[v] {
                return Err(GraphError::PsiNotProper { u, v, color: psi[u] });
            }
        }
        Ok(Graph { n, adj, out, inn, edges, psi, m })
    }

    /// Replaces the orientation. `directed` must cover every undirected edge
    /// exactly once.
    pub fn reoriented(&self, directed: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut assigned = BTreeSet::new();
        for &(u, v) in directed {
            let key = (u.min(v), u.max(v));
            if self.edges.binary_search(&key).is_err() {
                return Err(GraphError::OrientationUnknownEdge { u, v });
            }
            if !assigned.insert(key) {
                return Err(GraphError::OrientationBothDirections { u: key.0, v: key.1 });
            }
        }
        if let Some(&(u, v)) = self.edges.iter().find(|e| !assigned.contains(e)) {
            return Err(GraphError::OrientationMissingEdge { u, v });
        }
        Self::from_directed_edges(self.n, directed, self.psi.clone(), self.m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges as `(min, max)` pairs, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.inn[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn max_out_degree(&self) -> usize {
        (0..self.n).map(|v| self.out_degree(v)).max().unwrap_or(0)
    }

    pub fn psi(&self, v: usize) -> u32 {
        self.psi[v]
    }

    pub fn psi_all(&self) -> &[u32] {
        &self.psi
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Returns a copy of the graph with a new proper coloring as `psi`.
    pub fn with_psi(&self, psi: Vec<u32>, m: u32) -> Result<Self, GraphError> {
        let directed: Vec<(usize, usize)> = (0..self.n)
            .flat_map(|u| self.out[u].iter().map(move |&v| (u, v)))
            .collect();
        Self::from_directed_edges(self.n, &directed, psi, m)
    }

    /// Induced subgraph on `vertices` (deduplicated, sorted). Returns the
    /// subgraph (with vertices renumbered `0..k`, orientation and psi
    /// inherited) and the map from new indices to original vertex ids.
    pub fn induced(&self, vertices: &[usize]) -> Result<(Graph, Vec<usize>), GraphError> {
        let ids: Vec<usize> = {
            let set: BTreeSet<usize> = vertices.iter().copied().collect();
            set.into_iter().collect()
        };
        let mut new_index = vec![usize::MAX; self.n];
        for (i, &v) in ids.iter().enumerate() {
            new_index[v] = i;
        }
        let mut directed = Vec::new();
        for &u in &ids {
            for &v in &self.out[u] {
                if new_index[v] != usize::MAX {
                    directed.push((new_index[u], new_index[v]));
                }
            }
        }
        let psi = ids.iter().map(|&v| self.psi[v]).collect();
        let sub = Graph::from_directed_edges(ids.len(), &directed, psi, self.m)?;
        Ok((sub, ids))
    }
}

/// Errors raised while normalizing color lists.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ListError {
    #[error("vertex {vertex} has a list of size {got}, need at least {need}")]
    ListTooSmall { vertex: usize, got: usize, need: usize },
    #[error("vertex {vertex} lists color {color} outside the color space of size {space}")]
    ColorOutOfRange { vertex: usize, color: u32, space: u64 },
    #[error("expected {expected} lists, got {got}")]
    LengthMismatch { got: usize, expected: usize },
}

/// Per-vertex color lists, all of the same exact size `l0`, sorted and
/// duplicate-free, drawn from a color space `0..space`.
#[derive(Debug, Clone)]
pub struct ListAssignment {
    lists: Vec<Vec<u32>>,
    l0: usize,
    space: u64,
}

impl ListAssignment {
    /// Normalizes raw lists to exact size `l0` by keeping the `l0` smallest
    /// colors of each list (a deterministic choice of the allowed arbitrary
    /// subset).
    pub fn normalize(
        raw: Vec<Vec<u32>>,
        l0: usize,
        space: u64,
        n: usize,
    ) -> Result<Self, ListError> {
        if raw.len() != n {
            return Err(ListError::LengthMismatch { got: raw.len(), expected: n });
        }
        let mut lists = Vec::with_capacity(raw.len());
        for (vertex, list) in raw.into_iter().enumerate() {
            let mut sorted: Vec<u32> = list;
            sorted.sort_unstable();
            sorted.dedup();
            if let Some(&color) = sorted.iter().find(|&&c| u64::from(c) >= space) {
                return Err(ListError::ColorOutOfRange { vertex, color, space });
            }
            if sorted.len() < l0 {
                return Err(ListError::ListTooSmall { vertex, got: sorted.len(), need: l0 });
            }
            sorted.truncate(l0);
            lists.push(sorted);
        }
        Ok(ListAssignment { lists, l0, space })
    }

    pub fn list(&self, v: usize) -> &[u32] {
        &self.lists[v]
    }

    pub fn lists(&self) -> &[Vec<u32>] {
        &self.lists
    }

    pub fn l0(&self) -> usize {
        self.l0
    }

    pub fn space(&self) -> u64 {
        self.space
    }
}

/// A (possibly partial) vertex coloring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexColoring {
    colors: Vec<Option<u32>>,
}

impl VertexColoring {
    pub fn empty(n: usize) -> Self {
        VertexColoring { colors: vec![None; n] }
    }

    pub fn from_colors(colors: Vec<Option<u32>>) -> Self {
        VertexColoring { colors }
    }

    pub fn get(&self, v: usize) -> Option<u32> {
        self.colors[v]
    }

    pub fn set(&mut self, v: usize, color: u32) {
        self.colors[v] = Some(color);
    }

    pub fn colors(&self) -> &[Option<u32>] {
        &self.colors
    }

    pub fn is_complete(&self) -> bool {
        self.colors.iter().all(|c| c.is_some())
    }

    pub fn colored_count(&self) -> usize {
        self.colors.iter().filter(|c| c.is_some()).count()
    }

    /// Number of distinct colors used.
    pub fn palette_used(&self) -> usize {
        let set: BTreeSet<u32> = self.colors.iter().flatten().copied().collect();
        set.len()
    }

    /// Largest color index used, if any vertex is colored.
    pub fn max_color(&self) -> Option<u32> {
        self.colors.iter().flatten().copied().max()
    }
}

/// A single validation failure found by [`validate_coloring`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Vertex has more than `d` neighbors sharing its color; carries the
    /// offending neighbor count.
    Defect { vertex: usize, same_colored: usize, allowed: usize },
    /// Vertex picked a color not on its list.
    NotOnList { vertex: usize, color: u32 },
}

/// Validation report: empty iff the coloring is a valid `d`-defective
/// (list) coloring of the colored subset.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every colored vertex has at most `d` same-colored neighbors
/// and (when lists are given) that its color is on its list. Uncolored
/// vertices are ignored.
pub fn validate_coloring(
    g: &Graph,
    lists: Option<&ListAssignment>,
    coloring: &VertexColoring,
    d: usize,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    for v in 0..g.n() {
        let Some(c) = coloring.get(v) else { continue };
        let same = g
            .neighbors(v)
            .iter()
            .filter(|&&u| coloring.get(u) == Some(c))
            .count();
        if same > d {
            report.violations.push(Violation::Defect { vertex: v, same_colored: same, allowed: d });
        }
        if let Some(lists) = lists {
            if lists.list(v).binary_search(&c).is_err() {
                report.violations.push(Violation::NotOnList { vertex: v, color: c });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertex_path() {
        let g = Graph::from_directed_edges(2, &[(0, 1)], vec![0, 1], 2).unwrap();
        assert_eq!(g.max_degree(), 1);
        assert_eq!(g.max_out_degree(), 1);
        assert_eq!(g.out_neighbors(0), &[1]);
        assert_eq!(g.in_neighbors(1), &[0]);
    }

    #[test]
    fn psi_must_be_proper() {
        let err = Graph::from_edges(2, &[(0, 1)], vec![0, 0], 2).unwrap_err();
        assert_eq!(err, GraphError::PsiNotProper { u: 0, v: 1, color: 0 });
    }

    #[test]
    fn five_cycle_alternating_orientation() {
        // Orientation 0->1, 2->1, 2->3, 4->3, 4->0: outdegrees 1,0,2,0,2.
        let g = Graph::from_directed_edges(
            5,
            &[(0, 1), (2, 1), (2, 3), (4, 3), (4, 0)],
            vec![0, 1, 0, 1, 2],
            3,
        )
        .unwrap();
        assert_eq!(g.max_degree(), 2);
        assert_eq!(g.max_out_degree(), 2);
        assert_eq!(g.out_degree(0), 1);
        assert_eq!(g.out_degree(2), 2);
        assert_eq!(g.out_degree(3), 0);
    }

    #[test]
    fn rejects_self_loop_and_duplicate() {
        assert_eq!(
            Graph::from_edges(3, &[(1, 1)], vec![0, 1, 2], 3).unwrap_err(),
            GraphError::SelfLoop { index: 0, vertex: 1 }
        );
        assert_eq!(
            Graph::from_edges(3, &[(0, 1), (1, 0)], vec![0, 1, 2], 3).unwrap_err(),
            GraphError::DuplicateEdge { index: 1, u: 0, v: 1 }
        );
    }

    #[test]
    fn outdegree_sums_to_edge_count() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)], vec![0, 1, 0, 1], 2)
            .unwrap();
        let total: usize = (0..g.n()).map(|v| g.out_degree(v)).sum();
        assert_eq!(total, g.edge_count());
    }

    #[test]
    fn normalize_keeps_smallest() {
        let la = ListAssignment::normalize(vec![vec![9, 1, 4, 7]], 3, 10, 1).unwrap();
        assert_eq!(la.list(0), &[1, 4, 7]);
        let err = ListAssignment::normalize(vec![vec![5]], 2, 10, 1).unwrap_err();
        assert_eq!(err, ListError::ListTooSmall { vertex: 0, got: 1, need: 2 });
    }

    #[test]
    fn validator_counts_defects() {
        let g =
            Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)], vec![0, 1, 2], 3).unwrap();
        let proper = VertexColoring::from_colors(vec![Some(0), Some(1), Some(2)]);
        assert!(validate_coloring(&g, None, &proper, 0).is_valid());

        let defective = VertexColoring::from_colors(vec![Some(0), Some(0), Some(1)]);
        let report = validate_coloring(&g, None, &defective, 0);
        assert_eq!(report.violations.len(), 2);
        assert!(validate_coloring(&g, None, &defective, 1).is_valid());
    }

    #[test]
    fn induced_subgraph_keeps_orientation() {
        let g = Graph::from_directed_edges(
            5,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)],
            vec![0, 1, 0, 1, 2],
            3,
        )
        .unwrap();
        let (sub, ids) = g.induced(&[0, 2, 4]).unwrap();
        assert_eq!(ids, vec![0, 2, 4]);
        // Only the 4->0 edge survives; renumbered 2->0.
        assert_eq!(sub.edge_count(), 1);
        assert_eq!(sub.out_neighbors(2), &[0]);
        assert_eq!(sub.psi_all(), &[0, 0, 2]);
    }
}
