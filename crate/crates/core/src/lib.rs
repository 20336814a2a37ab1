//! Algorithms for fast distributed coloring in the synchronous message-passing
//! model, together with a deterministic round-by-round simulator and bit-level
//! message accounting.
//!
//! The crate is organized around a single abstraction: a *conflict coloring*
//! instance, where every node must pick a color from its private list and the
//! colors admissible across an edge are constrained by a symmetric relation.
//! Proper list coloring is the special case where the relation is equality.
//!
//! Modules:
//!
//! * [`graph`] — simple directed/undirected graphs with IDs and orientations.
//! * [`combinatorics`] — subset ranking, cover-free families, binomial
//!   estimates shared by the parameter machinery.
//! * [`conflict`] — conflict relations, instances, and the zero-round solver.
//! * [`framework`] — the two-level sublist construction that turns one
//!   conflict coloring instance into another with far fewer communicated bits.
//! * [`simulator`] — deterministic synchronous execution with message traces.
//! * [`protocols`] — the concrete node programs (color reduction, list
//!   coloring in two rounds, defective coloring, and the full
//!   degree-plus-one pipeline).
//! * [`gen`] — seeded generators for graphs, input colorings, and lists.

pub mod combinatorics;
pub mod conflict;
pub mod framework;
pub mod gen;
pub mod graph;
pub mod protocols;
pub mod simulator;

pub use graph::Graph;
