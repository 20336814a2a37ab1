//! Two-round list coloring from zero-round system selection.
//!
//! Phase 1 costs no communication: every vertex picks a system K_v of
//! candidate sublists purely from its type (input color, list), using the
//! globally known restricted family and the greedy type assignment. Round 1
//! exchanges types so each vertex can reproduce the relevant neighbors'
//! systems and keep a sublist C_v that conflicts with none of them; round 2
//! exchanges the index of C_v within K_v and a final color is chosen inside
//! C_v. The directed variant resolves the final color as the smallest one
//! no out-neighbor kept; the undirected variant (defective coloring) takes
//! the color fewest neighbors kept.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::combinatorics::tau_conflict;
use crate::conflict::{solve_zero_round, zero_round_assignment};
use crate::framework::{Budget, P2Cache, ParameterSet, RestrictedP2};
use crate::graph::{validate_coloring, Graph, ListAssignment, VertexColoring};
use crate::protocols::{
    account_bits, AccountingContext, AccountingMode, ProtocolError, ProtocolPayload,
};
use crate::simulator::{run, Addressee, Incoming, NodeProgram, Outgoing, RoundTrace, RunOptions};

/// Everything shared by both rounds: the restricted instance plus the
/// zero-round type assignment (element per (input color, list index)).
pub(crate) struct PreparedLists {
    pub p2: Arc<RestrictedP2>,
    /// `assignment[psi][list]` = chosen instance element.
    pub assignment: Vec<Vec<usize>>,
    /// Zero-round selection per vertex.
    pub chosen: Vec<usize>,
}

pub(crate) fn prepare_lists(
    graph: &Graph,
    lists: &ListAssignment,
    params: &ParameterSet,
    budget: &Budget,
    cache: &mut P2Cache,
) -> Result<PreparedLists, ProtocolError> {
    if lists.l0() != params.l0 as usize {
        return Err(ProtocolError::Invalid(format!(
            "lists are normalized to {} colors but the parameters expect l0 = {}",
            lists.l0(),
            params.l0
        )));
    }
    if u64::from(graph.m()) != params.m {
        return Err(ProtocolError::Invalid(format!(
            "input coloring uses {} colors but the parameters expect m = {}",
            graph.m(),
            params.m
        )));
    }
    if lists.space() > params.color_space {
        return Err(ProtocolError::Invalid(format!(
            "lists use a colorspace of {} but the parameters allow {}",
            lists.space(),
            params.color_space
        )));
    }

    let mut index_of: BTreeMap<&[u32], usize> = BTreeMap::new();
    let mut distinct: Vec<Vec<u32>> = Vec::new();
    for list in lists.lists() {
        index_of.entry(list.as_slice()).or_insert_with(|| {
            distinct.push(list.clone());
            distinct.len() - 1
        });
    }
    let list_of: Vec<usize> = lists.lists().iter().map(|l| index_of[l.as_slice()]).collect();

    let p2 = cache.get_or_build(&distinct, params, budget)?;
    if !p2.solvability.satisfied {
        return Err(ProtocolError::NotSolvable(format!(
            "min list size {} vs m*|F|*d with m = {}, |F| = {}, degree {} (exact: {})",
            p2.min_list_len,
            params.m,
            p2.lists.len(),
            p2.degree.describe(),
            p2.degree_exact,
        )));
    }

    let assignment = zero_round_assignment(&p2.instance)?;
    let chosen = solve_zero_round(&p2.instance, graph.psi_all(), &list_of)?;
    Ok(PreparedLists { p2, assignment, chosen })
}

/// How the final color is picked inside the kept sublist C_v.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FinalRule {
    /// Smallest color no out-neighbor kept (proper coloring).
    SmallestRemaining,
    /// Color kept by the fewest neighbors, ties to the smallest color
    /// (defective coloring).
    FewestHolders,
}

#[derive(Debug, Clone, Hash)]
enum Stage {
    /// Carrying the zero-round system element.
    PickSublist { element: usize },
    /// Carrying own element, kept-member position, and the relevant
    /// neighbors' elements (sorted by sender).
    PickColor { element: usize, member: usize, heard: Vec<(usize, usize)> },
    Done { color: u32 },
}

#[derive(Debug, Clone, Hash)]
struct TwoRoundState {
    psi: u32,
    list: Vec<u32>,
    stage: Stage,
}

struct TwoRoundProgram<'a> {
    prepared: &'a PreparedLists,
    lists: &'a ListAssignment,
    tau: usize,
    undirected: bool,
    rule: FinalRule,
    ctx: AccountingContext,
}

impl TwoRoundProgram<'_> {
    fn members(&self, element: usize) -> &[Vec<u32>] {
        &self.prepared.p2.decode[element]
    }

    fn element_for(&self, psi: u32, list: &[u32]) -> usize {
        let list_idx = self
            .prepared
            .p2
            .lists
            .iter()
            .position(|l| l.as_slice() == list)
            .expect("announced list must be one of the known distinct lists");
        self.prepared.assignment[psi as usize][list_idx]
    }
}

impl NodeProgram for TwoRoundProgram<'_> {
    type State = TwoRoundState;
    type Payload = ProtocolPayload;

    fn init(&self, v: usize, graph: &Graph) -> (TwoRoundState, bool) {
        let state = TwoRoundState {
            psi: graph.psi(v),
            list: self.lists.list(v).to_vec(),
            stage: Stage::PickSublist { element: self.prepared.chosen[v] },
        };
        (state, false)
    }

    fn compose(
        &self,
        round: usize,
        _v: usize,
        state: &TwoRoundState,
    ) -> Vec<Outgoing<ProtocolPayload>> {
        // Only vertices that look at the payload get it: everyone under the
        // undirected rule, in-neighbors otherwise.
        let to = if self.undirected { Addressee::AllNeighbors } else { Addressee::InNeighbors };
        let payload = match (round, &state.stage) {
            (1, Stage::PickSublist { .. }) => ProtocolPayload::ListAnnouncement {
                psi: state.psi,
                colors: state.list.clone(),
            },
            (2, Stage::PickColor { member, .. }) => {
                ProtocolPayload::SublistIndex(*member as u64)
            }
            _ => unreachable!("two-round protocol drifted out of stage"),
        };
        let bits = account_bits(&payload, &self.ctx).expect("list payload accounting");
        vec![Outgoing { to, payload, bits }]
    }

    fn absorb(
        &self,
        round: usize,
        _v: usize,
        mut state: TwoRoundState,
        inbox: &[Incoming<ProtocolPayload>],
    ) -> (TwoRoundState, bool) {
        match (round, state.stage.clone()) {
            (1, Stage::PickSublist { element }) => {
                let heard: Vec<(usize, usize)> = inbox
                    .iter()
                    .map(|msg| match &msg.payload {
                        ProtocolPayload::ListAnnouncement { psi, colors } => {
                            (msg.from, self.element_for(*psi, colors))
                        }
                        _ => unreachable!("round 1 carries list announcements"),
                    })
                    .collect();
                let rivals: Vec<&Vec<u32>> = heard
                    .iter()
                    .flat_map(|&(_, e)| self.members(e).iter())
                    .collect();
                let member = self
                    .members(element)
                    .iter()
                    .position(|mine| {
                        !rivals.iter().any(|other| tau_conflict(mine, other, self.tau))
                    })
                    .unwrap_or(usize::MAX);
                state.stage = Stage::PickColor { element, member, heard };
                (state, false)
            }
            (2, Stage::PickColor { element, member, heard }) => {
                let kept: BTreeMap<usize, usize> = inbox
                    .iter()
                    .map(|msg| match msg.payload {
                        ProtocolPayload::SublistIndex(position) => {
                            (msg.from, position as usize)
                        }
                        _ => unreachable!("round 2 carries sublist indices"),
                    })
                    .collect();
                let neighbor_sublists: Vec<&Vec<u32>> = heard
                    .iter()
                    .filter_map(|&(from, e)| {
                        kept.get(&from).map(|&position| &self.members(e)[position])
                    })
                    .collect();
                let own = &self.members(element)[member];
                let color = match self.rule {
                    FinalRule::SmallestRemaining => {
                        let excluded: BTreeSet<u32> = neighbor_sublists
                            .iter()
                            .flat_map(|s| s.iter().copied())
                            .collect();
                        own.iter().copied().find(|c| !excluded.contains(c))
                    }
                    FinalRule::FewestHolders => own
                        .iter()
                        .copied()
                        .min_by_key(|c| {
                            let holders = neighbor_sublists
                                .iter()
                                .filter(|s| s.binary_search(c).is_ok())
                                .count();
                            (holders, *c)
                        }),
                };
                state.stage = Stage::Done { color: color.unwrap_or(u32::MAX) };
                (state, true)
            }
            _ => unreachable!("two-round protocol drifted out of stage"),
        }
    }
}

/// Outcome of either two-round variant.
#[derive(Debug, Clone)]
pub struct TwoRoundOutcome {
    pub coloring: VertexColoring,
    pub trace: RoundTrace,
    /// Size of the smallest retained per-list family (the solvability `l`).
    pub min_list_len: usize,
    pub degree_exact: bool,
}

pub(crate) fn run_two_round(
    graph: &Graph,
    lists: &ListAssignment,
    params: &ParameterSet,
    budget: &Budget,
    cache: &mut P2Cache,
    mode: AccountingMode,
    undirected: bool,
    rule: FinalRule,
    defect: usize,
) -> Result<TwoRoundOutcome, ProtocolError> {
    let prepared = prepare_lists(graph, lists, params, budget, cache)?;
    let program = TwoRoundProgram {
        prepared: &prepared,
        lists,
        tau: params.tau as usize,
        undirected,
        rule,
        ctx: AccountingContext::with_params(mode, params),
    };
    let (states, trace) = run(graph, &program, &RunOptions::default())?;
    debug_assert_eq!(trace.round_count(), 2);

    let mut colors = Vec::with_capacity(graph.n());
    for (v, state) in states.iter().enumerate() {
        match state.stage {
            Stage::Done { color } if color != u32::MAX => colors.push(Some(color)),
            Stage::Done { .. } => {
                return Err(ProtocolError::EmptyChoice {
                    vertex: v,
                    context: "no sublist or color survived the neighborhood exchange; \
                              the survival guarantees were violated"
                        .into(),
                })
            }
            _ => unreachable!("all vertices halt in Done"),
        }
    }
    let coloring = VertexColoring::from_colors(colors);
    let report = validate_coloring(graph, Some(lists), &coloring, defect);
    if !report.is_valid() {
        return Err(ProtocolError::Invalid(format!(
            "internal invariant breach: output failed validation: {:?}",
            report.violations
        )));
    }
    Ok(TwoRoundOutcome {
        coloring,
        trace,
        min_list_len: prepared.p2.min_list_len,
        degree_exact: prepared.p2.degree_exact,
    })
}

/// Two-round proper list coloring on an oriented graph with out-degree at
/// most `params.beta`.
pub fn linial_for_lists(
    graph: &Graph,
    lists: &ListAssignment,
    params: &ParameterSet,
    budget: &Budget,
    cache: &mut P2Cache,
    mode: AccountingMode,
) -> Result<TwoRoundOutcome, ProtocolError> {
    if let Some(v) = (0..graph.n()).find(|&v| graph.out_degree(v) as u64 > params.beta) {
        return Err(ProtocolError::OutDegreeExceedsBeta {
            vertex: v,
            out_degree: graph.out_degree(v),
            beta: params.beta,
        });
    }
    if !params.survives_system_selection(params.beta) {
        return Err(ProtocolError::Invalid(format!(
            "k' = {} does not survive system selection against beta = {}, tau' = {}",
            params.k_prime, params.beta, params.tau_prime
        )));
    }
    if !params.survives_color_selection(params.beta) {
        return Err(ProtocolError::Invalid(format!(
            "k = {} does not survive color selection against beta = {}, tau = {}",
            params.k, params.beta, params.tau
        )));
    }
    run_two_round(
        graph,
        lists,
        params,
        budget,
        cache,
        mode,
        false,
        FinalRule::SmallestRemaining,
        0,
    )
}
