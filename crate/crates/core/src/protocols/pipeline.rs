//! (deg+1)-list coloring pipeline.
//!
//! Structure: an iterated color reduction produces a small proper base
//! coloring ψ*; then t halving phases run. Each phase partitions the
//! uncolored subgraph into low-outdegree parts and processes the parts
//! sequentially. A part's stage colors every vertex whose residual list
//! still holds at least T = ⌈Δ_j/2⌉ colors — through the two-round list
//! protocol when the restricted family is enumerable and certified
//! solvable, through a sequential greedy otherwise. Vertices left
//! uncolored had residuals below T, so (lists exceeding degrees) their
//! uncolored degree is below Δ_j/2: the uncolored subgraph halves its
//! maximum degree every phase, which is asserted, not assumed. A final
//! palette-scheduling sweep colors whatever remains.

use serde::Serialize;

use crate::framework::{derive_parameters, Budget, Mode, Overrides, P2Cache};
use crate::graph::{validate_coloring, Graph, ListAssignment, VertexColoring};
use crate::protocols::linial::{iterated_linial, IteratedReport};
use crate::protocols::lists::linial_for_lists;
use crate::protocols::partition::low_outdegree_partition;
use crate::protocols::{
    account_bits, AccountingContext, AccountingMode, ProtocolError, ProtocolPayload,
};
use crate::simulator::{run, Addressee, Incoming, NodeProgram, Outgoing, RoundTrace, RunOptions};

/// Knobs for a pipeline run. Desk mode must supply `x_override` (the X in
/// β_j = ⌊√(Δ_j/(2X))⌋) and the core stage parameters; Paper mode derives
/// X from (Δ, |C|, m) and refuses to run when that makes β_j < 1.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub x_override: Option<f64>,
    pub core: Option<Overrides>,
    pub budget: Budget,
    pub accounting: AccountingMode,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub part: usize,
    pub part_size: usize,
    pub eligible: usize,
    pub honest: bool,
    /// Why the stage fell back (empty when honest).
    pub fallback_reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseReport {
    pub phase: usize,
    pub delta_bound: u64,
    pub threshold: u64,
    pub beta: u64,
    pub parts: usize,
    pub stages: Vec<StageReport>,
    pub colored: usize,
    pub uncolored_after: usize,
    pub max_uncolored_degree_after: usize,
    pub charged_rounds: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub x: f64,
    pub t: usize,
    pub base: IteratedReport,
    pub base_palette: u64,
    pub phases: Vec<PhaseReport>,
    pub final_palette: Option<u64>,
    pub final_schedule_rounds: usize,
    /// Nominal distributed cost: base rounds + per-phase partition and
    /// stage charges + the final reduction and schedule.
    pub charged_rounds: u64,
    /// Rounds actually executed on the simulator.
    pub simulated_rounds: usize,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub coloring: VertexColoring,
    pub report: PipelineReport,
    pub trace: RoundTrace,
}

/// Appends `part` to `total`, renumbering rounds consecutively.
fn extend_trace(total: &mut RoundTrace, part: RoundTrace) {
    let offset = total.rounds.len();
    for (i, mut record) in part.rounds.into_iter().enumerate() {
        record.round = offset + i + 1;
        total.rounds.push(record);
    }
    total.completed &= part.completed;
}

fn log2_clamped(x: f64) -> f64 {
    if x <= 2.0 {
        x.log2().max(0.0)
    } else {
        x.log2()
    }
}

fn loglog2(x: f64) -> f64 {
    if x <= 2.0 {
        0.0
    } else {
        x.log2().log2()
    }
}

/// The paper-mode X term: 4e(4log₂Δ + log₂log₂|C| + log₂log₂m + 8).
pub fn paper_x(delta: u64, color_space: u64, m: u64) -> f64 {
    4.0 * std::f64::consts::E
        * (4.0 * log2_clamped(delta as f64)
            + loglog2(color_space as f64)
            + loglog2(m as f64)
            + 8.0)
}

/// Current residual list: own colors minus those taken by colored
/// neighbors.
fn residual(
    graph: &Graph,
    lists: &[Vec<u32>],
    colors: &[Option<u32>],
    v: usize,
) -> Vec<u32> {
    lists[v]
        .iter()
        .copied()
        .filter(|c| {
            !graph.neighbors(v).iter().any(|&u| colors[u] == Some(*c))
        })
        .collect()
}

struct StagePlan {
    lists: ListAssignment,
    graph: Graph,
    ids: Vec<usize>,
}

/// Checks the honest-path preconditions and builds the stage instance;
/// returns the reason for falling back otherwise.
fn plan_honest_stage(
    working: &Graph,
    uncolored_ids: &[usize],
    part_out: &[Vec<usize>],
    eligible: &[usize],
    residuals: &[Vec<u32>],
    color_space: u64,
    core: &Overrides,
) -> Result<StagePlan, String> {
    let l0 = core.l0 as usize;
    if let Some(i) = residuals.iter().position(|r| r.len() < l0) {
        return Err(format!(
            "vertex {} holds {} residual colors, below the stage l0 = {l0}",
            uncolored_ids[eligible[i]],
            residuals[i].len()
        ));
    }
    // Stage graph: eligible vertices with the partition's orientation.
    let mut directed = Vec::new();
    let rank: std::collections::BTreeMap<usize, usize> =
        eligible.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    for (i, &v) in eligible.iter().enumerate() {
        for &u in &part_out[v] {
            if let Some(&j) = rank.get(&u) {
                directed.push((i, j));
            }
        }
    }
    let psi: Vec<u32> = eligible.iter().map(|&v| working.psi(uncolored_ids[v])).collect();
    let graph = Graph::from_directed_edges(eligible.len(), &directed, psi, working.m())
        .map_err(|e| format!("stage graph: {e}"))?;
    let truncated: Vec<Vec<u32>> =
        residuals.iter().map(|r| r[..l0].to_vec()).collect();
    let lists = ListAssignment::normalize(truncated, l0, color_space, eligible.len())
        .map_err(|e| format!("stage lists: {e}"))?;
    Ok(StagePlan { lists, graph, ids: eligible.to_vec() })
}

/// Runs the full pipeline on raw lists with |L_v| ≥ deg(v)+1.
pub fn deg_plus_one_list_color(
    graph: &Graph,
    raw_lists: &[Vec<u32>],
    color_space: u64,
    config: &PipelineConfig,
) -> Result<PipelineOutcome, ProtocolError> {
    let n = graph.n();
    if raw_lists.len() != n {
        return Err(ProtocolError::Invalid(format!(
            "{} lists for {} vertices",
            raw_lists.len(),
            n
        )));
    }
    let mut lists: Vec<Vec<u32>> = Vec::with_capacity(n);
    for (v, raw) in raw_lists.iter().enumerate() {
        let mut list = raw.clone();
        list.sort_unstable();
        list.dedup();
        if list.len() <= graph.degree(v) {
            return Err(ProtocolError::Invalid(format!(
                "vertex {v} has degree {} but only {} distinct colors",
                graph.degree(v),
                list.len()
            )));
        }
        if let Some(&c) = list.iter().find(|&&c| u64::from(c) >= color_space) {
            return Err(ProtocolError::Invalid(format!(
                "vertex {v} lists color {c} outside the colorspace {color_space}"
            )));
        }
        lists.push(list);
    }

    let delta = graph.max_degree() as u64;
    let x = match config.mode {
        Mode::Paper => paper_x(delta, color_space, u64::from(graph.m())),
        Mode::Desk => config.x_override.ok_or_else(|| {
            ProtocolError::Invalid("desk mode needs an X override for the phase betas".into())
        })?,
    };
    if config.mode == Mode::Desk && config.core.is_none() {
        return Err(ProtocolError::Invalid(
            "desk mode needs core stage parameter overrides".into(),
        ));
    }
    if x <= 0.0 {
        return Err(ProtocolError::Invalid("X must be positive".into()));
    }

    // Base coloring.
    let base = iterated_linial(graph, config.budget.max_family, config.accounting)?;
    let working = graph.with_psi(base.psi.clone(), base.m)?;
    let mut trace = RoundTrace { rounds: Vec::new(), completed: true };
    let mut charged: u64 = base.report.rounds as u64;
    for t in &base.traces {
        extend_trace(&mut trace, t.clone());
    }

    let t = if delta >= 2 { (0.75 * (delta as f64).log2()).ceil() as usize } else { 0 };
    let mut colors: Vec<Option<u32>> = vec![None; n];
    let mut cache = P2Cache::new();
    let mut phases: Vec<PhaseReport> = Vec::new();
    let mut delta_bound = delta;

    for phase in 1..=t {
        let uncolored: Vec<usize> = (0..n).filter(|&v| colors[v].is_none()).collect();
        if uncolored.is_empty() {
            break;
        }
        let threshold = delta_bound.div_ceil(2);

        let beta = match config.mode {
            Mode::Paper => {
                let exact = (delta_bound as f64 / (2.0 * x)).sqrt();
                if exact < 1.0 {
                    return Err(ProtocolError::Invalid(format!(
                        "paper-mode beta for phase {phase} is {exact:.4} < 1 because X = {x:.1} \
                         exceeds the degree bound {delta_bound}; supply an X override"
                    )));
                }
                exact.floor() as u64
            }
            Mode::Desk => ((delta_bound as f64 / (2.0 * x)).sqrt().floor() as u64).max(1),
        };

        let (sub, ids) = working.induced(&uncolored)?;
        let partition = low_outdegree_partition(&sub, beta)?;
        let mut stages: Vec<StageReport> = Vec::new();
        let mut colored_this_phase = 0usize;

        for (part_index, part) in partition.parts.iter().enumerate() {
            // Residual lists are recomputed per stage: earlier stages of
            // the same phase may have colored neighbors.
            let eligible: Vec<usize> = part
                .iter()
                .copied()
                .filter(|&v| {
                    residual(graph, &lists, &colors, ids[v]).len() >= threshold as usize
                })
                .collect();
            charged += 3;
            if eligible.is_empty() {
                stages.push(StageReport {
                    part: part_index,
                    part_size: part.len(),
                    eligible: 0,
                    honest: false,
                    fallback_reason: "no vertex met the residual threshold".into(),
                });
                continue;
            }
            let residuals: Vec<Vec<u32>> = eligible
                .iter()
                .map(|&v| residual(graph, &lists, &colors, ids[v]))
                .collect();

            let honest = config.core.as_ref().map_or(
                Err("no core overrides".to_string()),
                |core| {
                    let plan = plan_honest_stage(
                        &working,
                        &ids,
                        &partition.out_neighbors,
                        &eligible,
                        &residuals,
                        color_space,
                        core,
                    )?;
                    let params = derive_parameters(
                        Mode::Desk,
                        beta,
                        u64::from(working.m()),
                        color_space,
                        Some(core),
                    )
                    .map_err(|e| format!("stage parameters: {e}"))?;
                    if !params.survives_system_selection(beta)
                        || !params.survives_color_selection(beta)
                    {
                        return Err(format!(
                            "survival fails at beta = {beta} for k' = {}, k = {}",
                            params.k_prime, params.k
                        ));
                    }
                    let outcome = linial_for_lists(
                        &plan.graph,
                        &plan.lists,
                        &params,
                        &config.budget,
                        &mut cache,
                        config.accounting,
                    )
                    .map_err(|e| format!("list protocol: {e}"))?;
                    Ok((plan, outcome))
                },
            );

            match honest {
                Ok((plan, outcome)) => {
                    for (i, &v) in plan.ids.iter().enumerate() {
                        colors[ids[v]] = outcome.coloring.get(i);
                    }
                    colored_this_phase += plan.ids.len();
                    extend_trace(&mut trace, outcome.trace);
                    stages.push(StageReport {
                        part: part_index,
                        part_size: part.len(),
                        eligible: eligible.len(),
                        honest: true,
                        fallback_reason: String::new(),
                    });
                }
                Err(reason) => {
                    // Sequential greedy in (ψ*, id) order; the (deg+1)
                    // surplus keeps a color available at every step.
                    let mut order = eligible.clone();
                    order.sort_by_key(|&v| (working.psi(ids[v]), ids[v]));
                    for &v in &order {
                        let global = ids[v];
                        let available = residual(graph, &lists, &colors, global);
                        let color = available.first().copied().ok_or_else(|| {
                            ProtocolError::EmptyChoice {
                                vertex: global,
                                context: "residual emptied during fallback stage".into(),
                            }
                        })?;
                        colors[global] = Some(color);
                    }
                    colored_this_phase += order.len();
                    stages.push(StageReport {
                        part: part_index,
                        part_size: part.len(),
                        eligible: eligible.len(),
                        honest: false,
                        fallback_reason: reason,
                    });
                }
            }
        }
        charged += partition.charged_rounds;

        // Halving invariant: max degree among the still-uncolored.
        let next_bound = delta_bound / 2;
        let still: Vec<usize> = (0..n).filter(|&v| colors[v].is_none()).collect();
        let max_uncolored_degree = still
            .iter()
            .map(|&v| {
                graph
                    .neighbors(v)
                    .iter()
                    .filter(|&&u| colors[u].is_none())
                    .count()
            })
            .max()
            .unwrap_or(0);
        if max_uncolored_degree as u64 > next_bound {
            return Err(ProtocolError::Invalid(format!(
                "internal invariant breach in phase {phase}: uncolored degree \
                 {max_uncolored_degree} exceeds {next_bound} (phase report: threshold \
                 {threshold}, beta {beta}, {} parts, {} colored)",
                partition.k, colored_this_phase
            )));
        }
        phases.push(PhaseReport {
            phase,
            delta_bound,
            threshold,
            beta,
            parts: partition.k,
            stages,
            colored: colored_this_phase,
            uncolored_after: still.len(),
            max_uncolored_degree_after: max_uncolored_degree,
            charged_rounds: partition.charged_rounds + 3 * partition.k as u64,
        });
        delta_bound = next_bound;
    }

    // Final phase: reduce the remaining palette, then schedule one color
    // class per round.
    let leftovers: Vec<usize> = (0..n).filter(|&v| colors[v].is_none()).collect();
    let mut final_palette = None;
    let mut final_schedule_rounds = 0;
    if !leftovers.is_empty() {
        let (sub, ids) = working.induced(&leftovers)?;
        let reduced = iterated_linial(&sub, config.budget.max_family, config.accounting)?;
        charged += reduced.report.rounds as u64;
        for t in &reduced.traces {
            extend_trace(&mut trace, t.clone());
        }
        let classes = reduced.psi;
        let palette = u64::from(reduced.m);
        final_palette = Some(palette);

        let residuals: Vec<Vec<u32>> = ids
            .iter()
            .map(|&global| residual(graph, &lists, &colors, global))
            .collect();
        let schedule = ScheduleProgram {
            classes: &classes,
            residuals: &residuals,
            ctx: AccountingContext::new(config.accounting, palette, color_space),
        };
        let options = RunOptions { max_rounds: palette as usize, order: None };
        let (states, sched_trace) = run(&sub, &schedule, &options)?;
        final_schedule_rounds = sched_trace.round_count();
        charged += final_schedule_rounds as u64;
        extend_trace(&mut trace, sched_trace);
        for (i, state) in states.iter().enumerate() {
            let color = state.pick.ok_or(ProtocolError::EmptyChoice {
                vertex: ids[i],
                context: "final schedule ended without a pick".into(),
            })?;
            colors[ids[i]] = Some(color);
        }
    }

    let coloring = VertexColoring::from_colors(colors);
    // The pipeline's lists have per-vertex lengths, so the membership
    // check runs directly instead of through a common-length assignment.
    let proper = validate_coloring(graph, None, &coloring, 0);
    let on_list = (0..n).all(|v| {
        coloring
            .get(v)
            .is_some_and(|c| lists[v].binary_search(&c).is_ok())
    });
    if !(proper.is_valid() && on_list) {
        return Err(ProtocolError::Invalid(
            "internal invariant breach: pipeline output failed validation".into(),
        ));
    }

    let simulated_rounds = trace.rounds.len();
    Ok(PipelineOutcome {
        coloring,
        report: PipelineReport {
            x,
            t,
            base: base.report,
            base_palette: u64::from(base.m),
            phases,
            final_palette,
            final_schedule_rounds,
            charged_rounds: charged,
            simulated_rounds,
        },
        trace,
    })
}

/// Final-phase scheduler: the class whose number matches the round picks
/// the smallest residual color and announces it; everyone else trims.
struct ScheduleProgram<'a> {
    classes: &'a [u32],
    residuals: &'a [Vec<u32>],
    ctx: AccountingContext,
}

#[derive(Debug, Clone, Hash)]
struct ScheduleState {
    class: u32,
    residual: Vec<u32>,
    pick: Option<u32>,
}

impl NodeProgram for ScheduleProgram<'_> {
    type State = ScheduleState;
    type Payload = ProtocolPayload;

    fn init(&self, v: usize, _graph: &Graph) -> (ScheduleState, bool) {
        let state = ScheduleState {
            class: self.classes[v],
            residual: self.residuals[v].clone(),
            pick: None,
        };
        (state, false)
    }

    fn compose(&self, round: usize, _v: usize, state: &ScheduleState) -> Vec<Outgoing<ProtocolPayload>> {
        if state.class as usize + 1 == round {
            let color = *state.residual.first().expect("scheduled vertex has a residual color");
            let payload = ProtocolPayload::ColorAnnouncement(color);
            let bits = account_bits(&payload, &self.ctx).expect("color accounting");
            vec![Outgoing { to: Addressee::AllNeighbors, payload, bits }]
        } else {
            Vec::new()
        }
    }

    fn absorb(
        &self,
        round: usize,
        _v: usize,
        mut state: ScheduleState,
        inbox: &[Incoming<ProtocolPayload>],
    ) -> (ScheduleState, bool) {
        for msg in inbox {
            match msg.payload {
                ProtocolPayload::ColorAnnouncement(c) => state.residual.retain(|&r| r != c),
                _ => unreachable!("schedule rounds only carry color announcements"),
            }
        }
        if state.class as usize + 1 == round {
            state.pick = state.residual.first().copied();
            (state, true)
        } else {
            (state, false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    fn desk_config(x: f64, core: (u64, u64, u64, u64, u64)) -> PipelineConfig {
        PipelineConfig {
            mode: Mode::Desk,
            x_override: Some(x),
            core: Some(Overrides {
                tau: core.0,
                tau_prime: core.1,
                k: core.2,
                k_prime: core.3,
                l0: core.4,
            }),
            budget: Budget::default(),
            accounting: AccountingMode::Formula,
        }
    }

    #[test]
    fn five_cycle_runs_honest_stages() {
        let edges = gen::cycle_edges(5);
        let g = gen::graph_with_greedy_psi(5, &edges).unwrap();
        assert_eq!(g.psi_all(), &[0, 1, 0, 1, 2]);
        let (raw, space) = gen::disjoint_lists(5, 6);
        let outcome =
            deg_plus_one_list_color(&g, &raw, space, &desk_config(1.0, (1, 2, 1, 2, 6)))
                .unwrap();
        assert!(outcome.coloring.is_complete());
        assert_eq!(outcome.report.t, 1);
        let phase = &outcome.report.phases[0];
        assert_eq!(phase.beta, 1);
        assert_eq!(phase.parts, 2);
        assert!(phase.stages.iter().all(|s| s.honest), "{:?}", phase.stages);
        assert_eq!(phase.uncolored_after, 0);
        assert_eq!(outcome.report.final_palette, None);
    }

    #[test]
    fn pipeline_completes_on_random_desk_instances() {
        for seed in [3u64, 17, 29] {
            let n = 48;
            let edges = gen::random_capped_edges(n, 6, seed);
            let (psi, m) = gen::psi_ids(n);
            let g = Graph::from_edges(n, &edges, psi, m).unwrap();
            let raw = gen::deg_plus_one_lists(&g, 64, seed ^ 0xbeef);
            let outcome =
                deg_plus_one_list_color(&g, &raw, 64, &desk_config(1.0, (1, 2, 1, 2, 4)))
                    .unwrap();
            assert!(outcome.coloring.is_complete());
            // Halving invariant, re-checked from the report.
            let delta = g.max_degree() as u64;
            for phase in &outcome.report.phases {
                assert!(
                    (phase.max_uncolored_degree_after as u64) <= delta >> phase.phase,
                    "phase {} left degree {}",
                    phase.phase,
                    phase.max_uncolored_degree_after
                );
            }
        }
    }

    #[test]
    fn paper_mode_asks_for_an_override() {
        let edges = gen::cycle_edges(6);
        let g = gen::graph_with_greedy_psi(6, &edges).unwrap();
        let (raw, space) = gen::disjoint_lists(6, 4);
        let config = PipelineConfig {
            mode: Mode::Paper,
            x_override: None,
            core: None,
            budget: Budget::default(),
            accounting: AccountingMode::Formula,
        };
        let err = deg_plus_one_list_color(&g, &raw, space, &config).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("supply an X override"), "{message}");
    }

    #[test]
    fn short_lists_are_rejected() {
        let edges = gen::cycle_edges(4);
        let g = gen::graph_with_greedy_psi(4, &edges).unwrap();
        let raw = vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 1, 2]];
        let err = deg_plus_one_list_color(&g, &raw, 8, &desk_config(1.0, (1, 2, 1, 2, 4)))
            .unwrap_err();
        assert!(err.to_string().contains("degree 2 but only 2"));
    }
}
