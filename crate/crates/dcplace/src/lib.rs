//! Facility placement on weighted graphs with a message-passing flavor:
//! a distributed Lloyd-style loop (partition into shortest-path regions,
//! recenter each region on its tree cost center, repeat) next to
//! centralized baselines, synthetic topology generators, and an experiment
//! harness that sweeps instance grids and reports cost ratios.
//!
//! The distributed pieces run on a deterministic discrete-event simulator
//! ([`netsim`]), so every run is reproducible from its seeds and message
//! counts can be asserted exactly.

pub mod baselines;
pub mod dlm;
pub mod error;
pub mod graph;
pub mod harness;
pub mod mpcost;
pub mod netsim;
pub mod region_tree;
pub mod seeding;
pub mod topology;
pub mod voronoi;

pub use error::{Error, Result};
pub use graph::{
    cost_center_exact, placement_cost, serving_assignment, shortest_distances, Graph, NodeId,
    Placement,
};
