//! Min-cost-flow data association.
//!
//! Every detection `i` becomes a split node pair `(u_i, v_i)` joined by a
//! unit-capacity detection edge, so at most one trajectory can use it. A
//! trajectory is a unit of flow `source -> u_i -> v_i -> u_j -> ... -> sink`;
//! its cost is the entry cost, the detection and link costs along the way,
//! and the exit cost. The solver finds the flow of any magnitude with the
//! minimum total cost, which is never positive because zero flow is feasible.

mod brute;
mod costs;
mod graph;
mod solver;
mod tracker;

pub use brute::{brute_force_solve, BRUTE_FORCE_LIMIT};
pub use costs::{detection_cost, link_cost, normalize_scores, piecewise_cost, CostConfig};
pub use graph::{build_graph, EdgeKind, FlowEdge, FlowGraph, Link, NodeId};
pub use solver::{extract_trajectories, solve_mcf, FlowSolution};
pub use tracker::{track_sequence, ExternalScorer, FnScorer, GbmScorer, Lp2dScorer, PairScorer, TrackOutput};
