//! Multi-activity linear-quadratic network games.
//!
//! Agents on a weighted undirected network choose effort levels in `k`
//! activities. Within an activity, neighbours' efforts spill over with
//! intensity `delta`; across activities, effort costs interact through
//! `beta` (and optionally a cross-activity spillover `gamma`). A planner
//! shifts the agents' baseline marginal utilities under a quadratic budget,
//! possibly restricted to a subset of activities.
//!
//! The crate provides:
//!
//! * [`graph`]: networks, Jacobi spectral decompositions, named example graphs;
//! * [`game`]: parameters, regularity margins, closed-form equilibrium and a
//!   best-response oracle;
//! * [`welfare`]: the block-structured welfare form and its Kronecker spectrum;
//! * [`intervene`]: the exact budget-constrained intervention (secular-equation
//!   trust-region solver), simple and small-budget constructions, and a
//!   projected-gradient oracle;
//! * [`analysis`]: welfare-improvement ratios, limits and parameter sweeps;
//! * [`spillover`]: the cross-activity spillover extension;
//! * [`scenario`] / [`report`]: the JSON scenario format and CSV output.

// NaN-rejecting `!(x > 0.0)` checks and index loops over coupled arrays are deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod game;
pub mod graph;
pub mod intervene;
pub mod linalg;
pub mod report;
pub mod scenario;
pub mod spillover;
pub mod welfare;

pub use error::{Error, Result};
pub use game::{ActivitySet, AssumptionMargins, EquilibriumResult, GameParams, UtilityVector};
pub use graph::{NamedGraph, Network, Spectrum};
pub use intervene::{InterventionProblem, InterventionResult, QpInstance, QpSolution};
pub use scenario::Scenario;
pub use welfare::{StructuredSpectrum, WelfareMatrix};

/// Margins at or below this value count as a violated regularity assumption.
pub const MARGIN_THRESHOLD: f64 = 1e-8;
