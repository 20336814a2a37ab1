//! Deterministic synchronous message-passing simulator.
//!
//! Execution model: every node runs the same program. In each round, all
//! active nodes first compose their outgoing messages from their current
//! state, then all messages are delivered, then all active nodes absorb
//! their (possibly empty) inbox and either continue or halt. A node halts
//! exactly once; afterwards its state is frozen and incoming messages are
//! dropped. The run ends when every node has halted, or when `max_rounds`
//! is reached (reported via [`RoundTrace::completed`]).
//!
//! Determinism: nodes are evaluated in a configurable order, but compose
//! sees only the pre-round state snapshot and absorb sees a sorted inbox,
//! so traces and final states are invariant under evaluation-order
//! shuffles. Messages in the trace are sorted by (from, to).

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimulatorError {
    #[error("round {round}: node {from} addressed {to}, which is not an adjacent node")]
    NotANeighbor { round: usize, from: usize, to: usize },
    #[error("round {round}: node {from} sent more than one message to {to}")]
    DuplicateMessage { round: usize, from: usize, to: usize },
    #[error("evaluation order must be a permutation of 0..{n}")]
    BadOrder { n: usize },
}

/// Message targets, resolved against the sender's adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Addressee {
    AllNeighbors,
    OutNeighbors,
    InNeighbors,
    One(usize),
}

/// A message as composed by a node: target set, payload, and its size in
/// bits under the protocol's accounting (one identical copy goes to every
/// resolved receiver).
#[derive(Debug, Clone)]
pub struct Outgoing<P> {
    pub to: Addressee,
    pub payload: P,
    pub bits: u64,
}

/// A delivered message.
#[derive(Debug, Clone)]
pub struct Incoming<P> {
    pub from: usize,
    pub payload: P,
}

/// A node program. `compose` must be a pure function of the state snapshot;
/// `absorb` consumes the state and the sorted inbox and decides whether to
/// halt. Nodes that halt in `init` never send or receive anything.
pub trait NodeProgram {
    type State: Clone + Hash + std::fmt::Debug;
    type Payload: Clone;

    fn init(&self, v: usize, graph: &Graph) -> (Self::State, bool);
    fn compose(&self, round: usize, v: usize, state: &Self::State) -> Vec<Outgoing<Self::Payload>>;
    fn absorb(
        &self,
        round: usize,
        v: usize,
        state: Self::State,
        inbox: &[Incoming<Self::Payload>],
    ) -> (Self::State, bool);
}

/// One recorded message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MessageRecord {
    pub from: usize,
    pub to: usize,
    pub bits: u64,
}

/// Everything observable about one executed round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub total_messages: u64,
    /// Largest single message sent this round (0 when silent).
    pub max_bits_per_node: u64,
    pub messages: Vec<MessageRecord>,
    /// Post-round digest of every node's state.
    pub state_digests: Vec<u64>,
    pub halted: Vec<bool>,
}

/// Full run record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundTrace {
    pub rounds: Vec<RoundRecord>,
    /// False when `max_rounds` elapsed with active nodes remaining.
    pub completed: bool,
}

impl RoundTrace {
    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    /// CSV summary with header `round,totalMessages,maxBitsPerNode`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,totalMessages,maxBitsPerNode\n");
        for r in &self.rounds {
            out.push_str(&format!("{},{},{}\n", r.round, r.total_messages, r.max_bits_per_node));
        }
        out
    }
}

/// Run options. `order` is the node evaluation order (defaults to
/// `0..n`) — results never depend on it; it exists so tests can prove that.
pub struct RunOptions {
    pub max_rounds: usize,
    pub order: Option<Vec<usize>>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { max_rounds: 64, order: None }
    }
}

fn digest<S: Hash>(state: &S) -> u64 {
    let mut hasher = DefaultHasher::new();
    state.hash(&mut hasher);
    hasher.finish()
}

/// Executes `program` on `graph`. Returns the final states and the trace.
pub fn run<Prog: NodeProgram>(
    graph: &Graph,
    program: &Prog,
    options: &RunOptions,
) -> Result<(Vec<Prog::State>, RoundTrace), SimulatorError> {
    let n = graph.n();
    let order: Vec<usize> = match &options.order {
        Some(order) => {
            let mut check = vec![false; n];
            for &v in order {
                if v >= n || check[v] {
                    return Err(SimulatorError::BadOrder { n });
                }
                check[v] = true;
            }
            if order.len() != n {
                return Err(SimulatorError::BadOrder { n });
            }
            order.clone()
        }
        None => (0..n).collect(),
    };

    let mut states: Vec<Prog::State> = Vec::with_capacity(n);
    let mut halted = vec![false; n];
    for v in 0..n {
        let (state, stop) = program.init(v, graph);
        states.push(state);
        halted[v] = stop;
    }

    let mut trace = RoundTrace { rounds: Vec::new(), completed: true };
    let mut round = 0;
    while halted.iter().any(|h| !h) {
        if round == options.max_rounds {
            trace.completed = false;
            break;
        }
        round += 1;

        // Compose against the pre-round snapshot.
        let mut inboxes: Vec<Vec<Incoming<Prog::Payload>>> = vec![Vec::new(); n];
        let mut records: Vec<MessageRecord> = Vec::new();
        // sent[to] remembers the last sender that addressed `to` this round;
        // a repeat of the same sender is a protocol bug.
        let mut sent = vec![u64::MAX; n];
        for &v in &order {
            if halted[v] {
                continue;
            }
            for outgoing in program.compose(round, v, &states[v]) {
                let receivers: &[usize] = match outgoing.to {
                    Addressee::AllNeighbors => graph.neighbors(v),
                    Addressee::OutNeighbors => graph.out_neighbors(v),
                    Addressee::InNeighbors => graph.in_neighbors(v),
                    Addressee::One(u) => std::slice::from_ref(
                        graph
                            .neighbors(v)
                            .iter()
                            .find(|&&w| w == u)
                            .ok_or(SimulatorError::NotANeighbor { round, from: v, to: u })?,
                    ),
                };
                for &to in receivers {
                    if sent[to] == v as u64 {
                        return Err(SimulatorError::DuplicateMessage { round, from: v, to });
                    }
                    sent[to] = v as u64;
                    records.push(MessageRecord { from: v, to, bits: outgoing.bits });
                    if !halted[to] {
                        inboxes[to]
                            .push(Incoming { from: v, payload: outgoing.payload.clone() });
                    }
                }
            }
        }
        records.sort_by_key(|r| (r.from, r.to));
        for inbox in &mut inboxes {
            inbox.sort_by_key(|i| i.from);
        }

        for &v in &order {
            if halted[v] {
                continue;
            }
            let state = states[v].clone();
            let (next, stop) = program.absorb(round, v, state, &inboxes[v]);
            states[v] = next;
            halted[v] = stop;
        }

        trace.rounds.push(RoundRecord {
            round,
            total_messages: records.len() as u64,
            max_bits_per_node: records.iter().map(|r| r.bits).max().unwrap_or(0),
            messages: records,
            state_digests: states.iter().map(digest).collect(),
            halted: halted.clone(),
        });
    }
    Ok((states, trace))
}
