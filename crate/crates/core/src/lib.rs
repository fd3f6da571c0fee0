//! Cooperation game between a rational node and a multi-hop network that
//! enforces forwarding through reputation.
//!
//! - [`model`]: mechanisms, utility and bandwidth feasibility
//! - [`solver`]: the node's constrained best response
//! - [`reputation`]: fine-grained and binary metrics under observation error
//! - [`sweep`]: utility and optimal-policy curves
//! - [`netsim`]: round-based best-response dynamics among many nodes
//! - [`cli`]: scenario files and CSV output for the `coopgame` binary

pub mod cli;
pub mod model;
pub mod netsim;
pub mod reputation;
pub mod solver;
pub mod sweep;

pub use model::{
    effective_transit, feasible, network_policy, service_ratio, utility, Mechanism, ModelError, Policy, Reputation,
    ServiceProfile, Utility,
};
pub use solver::{closed_form_oracle, solve, PolicyInterval, SolveResult, SolveStatus, SolverConfig, SolverError};
