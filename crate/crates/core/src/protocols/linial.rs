//! One-round color reduction through cover-free families, and its
//! iteration down to the palette fixpoint.

use serde::Serialize;

use crate::combinatorics::{greedy_cover_free, CoverFreeFamily};
use crate::graph::Graph;
use crate::protocols::{
    account_bits, AccountingContext, AccountingMode, ProtocolError, ProtocolPayload,
};
use crate::simulator::{run, Addressee, Incoming, NodeProgram, Outgoing, RoundTrace, RunOptions};

/// Result of one reduction round.
#[derive(Debug, Clone)]
pub struct LinialOutcome {
    pub psi: Vec<u32>,
    /// New palette size (= family universe).
    pub m: u32,
    pub trace: RoundTrace,
}

struct ReduceProgram<'a> {
    family: &'a CoverFreeFamily,
    directed: bool,
    ctx: AccountingContext,
}

#[derive(Debug, Clone, Hash)]
struct ReduceState {
    psi: u32,
    color: Option<u32>,
}

impl ReduceProgram<'_> {
    /// First element of own set avoided by every relevant neighbor's set.
    fn choose(&self, v: usize, own: u32, heard: &[u32]) -> Result<u32, ProtocolError> {
        let mine = &self.family.sets[own as usize];
        let avoid: Vec<&Vec<u32>> =
            heard.iter().map(|&p| &self.family.sets[p as usize]).collect();
        mine.iter()
            .copied()
            .find(|c| !avoid.iter().any(|set| set.binary_search(c).is_ok()))
            .ok_or_else(|| ProtocolError::EmptyChoice {
                vertex: v,
                context: format!(
                    "cover-free selection left nothing: own set {own}, {} neighbor sets",
                    avoid.len()
                ),
            })
    }
}

impl NodeProgram for ReduceProgram<'_> {
    type State = ReduceState;
    type Payload = ProtocolPayload;

    fn init(&self, v: usize, graph: &Graph) -> (ReduceState, bool) {
        (ReduceState { psi: graph.psi(v), color: None }, false)
    }

    fn compose(&self, _round: usize, _v: usize, state: &ReduceState) -> Vec<Outgoing<ProtocolPayload>> {
        // Receivers need the sender's input color; under an orientation
        // only in-neighbors look at it.
        let to = if self.directed { Addressee::InNeighbors } else { Addressee::AllNeighbors };
        let payload = ProtocolPayload::InputColor(state.psi);
        let bits = account_bits(&payload, &self.ctx).expect("input color accounting");
        vec![Outgoing { to, payload, bits }]
    }

    fn absorb(
        &self,
        _round: usize,
        v: usize,
        mut state: ReduceState,
        inbox: &[Incoming<ProtocolPayload>],
    ) -> (ReduceState, bool) {
        let heard: Vec<u32> = inbox
            .iter()
            .map(|msg| match msg.payload {
                ProtocolPayload::InputColor(psi) => psi,
                _ => unreachable!("reduction only sends input colors"),
            })
            .collect();
        state.color = self.choose(v, state.psi, &heard).ok();
        (state, true)
    }
}

/// Runs one simulated round of cover-free color reduction. With
/// `directed = true` each vertex avoids only its out-neighbors' sets, so
/// the family only needs to be cover-free against out-degree many sets.
pub fn linial_reduce(
    graph: &Graph,
    family: &CoverFreeFamily,
    directed: bool,
    mode: AccountingMode,
) -> Result<LinialOutcome, ProtocolError> {
    if (family.sets.len() as u64) < u64::from(graph.m()) {
        return Err(ProtocolError::FamilyTooSmall {
            got: family.sets.len(),
            need: graph.m() as usize,
        });
    }
    let ctx = AccountingContext::new(mode, u64::from(graph.m()), u64::from(family.universe));
    let program = ReduceProgram { family, directed, ctx };
    let (states, trace) = run(graph, &program, &RunOptions::default())?;

    let mut psi = Vec::with_capacity(graph.n());
    for (v, state) in states.iter().enumerate() {
        match state.color {
            Some(c) => psi.push(c),
            // Re-derive the error the absorb step swallowed.
            None => {
                let heard: Vec<u32> = if directed {
                    graph.out_neighbors(v).iter().map(|&u| graph.psi(u)).collect()
                } else {
                    graph.neighbors(v).iter().map(|&u| graph.psi(u)).collect()
                };
                program.choose(v, graph.psi(v), &heard)?;
                unreachable!("choose must fail exactly when the state holds no color");
            }
        }
    }
    Ok(LinialOutcome { psi, m: family.universe, trace })
}

/// Palette produced by one greedy cover-free reduction from `m` colors at
/// maximum degree `delta` (after the small-parameter clamps).
pub fn reduced_palette(m: u64, delta: u64) -> u64 {
    let m_eff = m.max(3);
    let delta_eff = delta.max(2);
    let z = (m_eff as f64).ln().ceil() as u64;
    let x = delta_eff * z;
    let l = (std::f64::consts::E.powi(2) * delta_eff as f64).ceil() as u64;
    x * l
}

#[derive(Debug, Clone, Serialize)]
pub struct IteratedReport {
    /// Palette sizes, starting with the input m and one entry per round.
    pub palettes: Vec<u64>,
    pub rounds: usize,
}

#[derive(Debug, Clone)]
pub struct IteratedOutcome {
    pub psi: Vec<u32>,
    pub m: u32,
    pub report: IteratedReport,
    pub traces: Vec<RoundTrace>,
}

/// Applies undirected reductions with fresh greedy families until the
/// palette stops shrinking.
pub fn iterated_linial(
    graph: &Graph,
    family_budget: u64,
    mode: AccountingMode,
) -> Result<IteratedOutcome, ProtocolError> {
    let delta = graph.max_degree() as u64;
    let mut current = graph.clone();
    let mut report =
        IteratedReport { palettes: vec![u64::from(current.m())], rounds: 0 };
    let mut traces = Vec::new();

    while reduced_palette(u64::from(current.m()), delta) < u64::from(current.m()) {
        let m_eff = current.m().max(3);
        let delta_eff = (delta as u32).max(2);
        let family = greedy_cover_free(m_eff, delta_eff, family_budget)?;
        let outcome = linial_reduce(&current, &family, false, mode)?;
        current = current.with_psi(outcome.psi, outcome.m)?;
        report.palettes.push(u64::from(outcome.m));
        report.rounds += 1;
        traces.push(outcome.trace);
    }

    Ok(IteratedOutcome {
        psi: current.psi_all().to_vec(),
        m: current.m(),
        report,
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::{validate_coloring, Graph, VertexColoring};

    fn as_coloring(psi: &[u32]) -> VertexColoring {
        VertexColoring::from_colors(psi.iter().map(|&c| Some(c)).collect())
    }

    #[test]
    fn triangle_reduces_to_sixty_color_palette() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)], vec![0, 1, 2], 3).unwrap();
        let family = greedy_cover_free(3, 2, 1_000_000).unwrap();
        let outcome = linial_reduce(&g, &family, false, AccountingMode::Formula).unwrap();
        assert_eq!(outcome.m, 60);
        assert_eq!(outcome.trace.round_count(), 1);
        let report = validate_coloring(&g, None, &as_coloring(&outcome.psi), 0);
        assert!(report.is_valid());
        assert!(outcome.psi.iter().all(|&c| c < 60));
    }

    #[test]
    fn edgeless_vertices_keep_their_first_set_element() {
        let g = Graph::from_edges(3, &[], vec![0, 1, 2], 3).unwrap();
        let family = greedy_cover_free(3, 2, 1_000_000).unwrap();
        let outcome = linial_reduce(&g, &family, false, AccountingMode::Formula).unwrap();
        for v in 0..3 {
            assert_eq!(outcome.psi[v], family.sets[v][0]);
        }
    }

    #[test]
    fn directed_path_avoids_outneighbors_only() {
        // Path oriented 0 -> 1 -> 2 -> 3, out-degree 1; a 2-cover-free
        // family is in particular 1-cover-free.
        let g = Graph::from_directed_edges(4, &[(1, 0), (2, 1), (3, 2)], vec![0, 1, 2, 3], 4)
            .unwrap();
        let family = greedy_cover_free(4, 2, 1_000_000).unwrap();
        let outcome = linial_reduce(&g, &family, true, AccountingMode::Formula).unwrap();
        let report = validate_coloring(&g, None, &as_coloring(&outcome.psi), 0);
        assert!(report.is_valid());
    }

    #[test]
    fn family_must_cover_every_input_color() {
        let g = Graph::from_edges(3, &[(0, 1)], vec![0, 1, 2], 3).unwrap();
        let family = greedy_cover_free(3, 2, 1_000_000).unwrap();
        let shrunk = CoverFreeFamily { sets: family.sets[..2].to_vec(), ..family };
        let err = linial_reduce(&g, &shrunk, false, AccountingMode::Formula).unwrap_err();
        assert!(matches!(err, ProtocolError::FamilyTooSmall { got: 2, need: 3 }));
    }

    #[test]
    fn iterated_reduction_reaches_the_fixpoint() {
        // With the degree cap saturated (n big enough forces some vertex to
        // the cap), m = 1024 sits above the palette fixpoint for delta = 3:
        // z = ceil(ln 1024) = 7, x = 21, l = ceil(3e^2) = 23, universe 483,
        // and 483 maps to itself.
        let edges = gen::random_capped_edges(1024, 3, 42);
        let (psi, m) = gen::psi_ids(1024);
        let g = Graph::from_edges(1024, &edges, psi, m).unwrap();
        assert_eq!(g.max_degree(), 3);
        let outcome = iterated_linial(&g, 1_000_000, AccountingMode::Formula).unwrap();
        assert_eq!(outcome.report.palettes, vec![1024, 483]);
        assert_eq!(outcome.report.rounds, 1);
        assert_eq!(reduced_palette(483, 3), 483);
        let report = validate_coloring(&g, None, &as_coloring(&outcome.psi), 0);
        assert!(report.is_valid());
    }

    #[test]
    fn already_at_fixpoint_means_zero_rounds() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)], vec![0, 1, 0, 1], 2).unwrap();
        let outcome = iterated_linial(&g, 1_000_000, AccountingMode::Formula).unwrap();
        assert_eq!(outcome.report.rounds, 0);
        assert_eq!(outcome.m, 2);
        assert_eq!(outcome.psi, vec![0, 1, 0, 1]);
    }
}
