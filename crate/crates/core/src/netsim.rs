//! Round-based best-response dynamics among many nodes sharing one mechanism.
//!
//! Each node sees the rest of the network as the single counterpart of the
//! two-party game: its own demand is `s_xn`, and the transit it is asked to
//! carry is its share of every peer's demand, multiplied by the average hop
//! count. Nodes update one at a time in id order, so later nodes in a round
//! already react to earlier nodes' new policies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{network_policy, Mechanism, ModelError, Policy, Reputation, ServiceProfile};
use crate::reputation::{default_samples, observe, ObservationModel};
use crate::solver::{solve, SolveStatus, SolverConfig, SolverError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("simulation needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("demand of node {node} must be finite and >= 0, got {value}")]
    BadDemand { node: usize, value: f64 },
    #[error("at least one node must have positive demand")]
    NoDemand,
    #[error("hop_factor must be >= 1, got {0}")]
    HopFactor(f64),
    #[error("initial_policy must be in [0, 1], got {0}")]
    InitialPolicy(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub mech: Mechanism,
    /// Own demand of each node; the node count is `demands.len()`.
    pub demands: Vec<f64>,
    /// Average number of intermediate hops per delivered unit.
    pub hop_factor: f64,
    pub g: f64,
    /// Per-node bandwidth, shared by all nodes.
    pub b: f64,
    pub e: f64,
    pub rounds: usize,
    pub seed: u64,
    pub solver_cfg: SolverConfig,
    /// Policy every node starts from.
    pub initial_policy: f64,
}

impl SimConfig {
    pub fn new(mech: Mechanism, demands: Vec<f64>) -> Self {
        SimConfig {
            mech,
            demands,
            hop_factor: 1.0,
            g: 10.0,
            b: f64::INFINITY,
            e: 0.0,
            rounds: 10,
            seed: 0,
            solver_cfg: SolverConfig::default(),
            initial_policy: 1.0,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.demands.len()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.demands.len() < 2 {
            return Err(SimError::TooFewNodes(self.demands.len()));
        }
        for (node, &value) in self.demands.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(SimError::BadDemand { node, value });
            }
        }
        if !self.demands.iter().any(|&d| d > 0.0) {
            return Err(SimError::NoDemand);
        }
        if !(self.hop_factor >= 1.0 && self.hop_factor.is_finite()) {
            return Err(SimError::HopFactor(self.hop_factor));
        }
        if !(0.0..=1.0).contains(&self.initial_policy) {
            return Err(SimError::InitialPolicy(self.initial_policy));
        }
        // g, b, e share the single-node domains
        ServiceProfile::new(0.0, 1.0, self.g, self.b, self.e)?;
        self.mech.validated()?;
        self.solver_cfg.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: usize,
    pub demand: f64,
    pub policy: Policy,
    /// The network's current estimate of this node's reputation.
    pub reputation: Reputation,
    pub opted_out: bool,
    pub cumulative_utility: f64,
}

impl NodeState {
    fn active_demand(&self) -> f64 {
        if self.opted_out {
            0.0
        } else {
            self.demand
        }
    }
}

pub fn initial_states(cfg: &SimConfig) -> Vec<NodeState> {
    let policy = Policy::saturating(cfg.initial_policy);
    cfg.demands
        .iter()
        .enumerate()
        .map(|(id, &demand)| NodeState {
            id,
            demand,
            policy,
            reputation: policy.into(),
            opted_out: false,
            cumulative_utility: 0.0,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedProfile {
    pub profile: ServiceProfile,
    /// No transit reaches the node; `s_nx` is a placeholder positive load.
    pub idle: bool,
}

/// Share of a peer's transit that lands on node `i`.
fn transit_weight(mech: Mechanism, states: &[NodeState], i: usize) -> f64 {
    let active: Vec<&NodeState> = states.iter().filter(|s| !s.opted_out).collect();
    let carriers = active.len().saturating_sub(1).max(1) as f64;
    if mech.splits_transit_by_reputation() {
        let total: f64 = active.iter().map(|s| s.reputation.value()).sum();
        if total > 0.0 {
            return states[i].reputation.value() / total;
        }
    }
    1.0 / carriers
}

/// The two-party game as node `i` sees it against the rest of the network.
pub fn derive_profile(cfg: &SimConfig, states: &[NodeState], i: usize) -> Result<DerivedProfile, SimError> {
    let me = &states[i];
    let s_xn = me.active_demand();
    let peer_demand: f64 = states
        .iter()
        .filter(|s| s.id != me.id)
        .map(NodeState::active_demand)
        .sum();
    let s_nx = cfg.hop_factor * peer_demand * transit_weight(cfg.mech, states, i);
    let idle = s_nx <= 0.0;
    let s_nx = if idle { f64::MIN_POSITIVE } else { s_nx };
    Ok(DerivedProfile {
        profile: ServiceProfile::new(s_xn, s_nx, cfg.g, cfg.b, cfg.e)?,
        idle,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundMetrics {
    pub round: usize,
    /// Mean policy over all nodes, opted-out nodes counting as zero.
    pub mean_policy: f64,
    pub opted_out_count: usize,
    pub delivered: f64,
    pub offered: f64,
}

/// A simulation in progress: configuration, node states and the RNG that
/// seeds per-observation reputation estimates.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimConfig,
    states: Vec<NodeState>,
    round: usize,
    rng: ChaCha8Rng,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let states = initial_states(&cfg);
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Simulation {
            cfg,
            states,
            round: 0,
            rng,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn states(&self) -> &[NodeState] {
        &self.states
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Runs one round of sequential best responses.
    pub fn step(&mut self) -> Result<RoundMetrics, SimError> {
        self.round += 1;
        let noisy = self.cfg.e > 0.0;
        for i in 0..self.states.len() {
            if self.states[i].opted_out {
                continue;
            }
            if noisy {
                let load = derive_profile(&self.cfg, &self.states, i)?.profile.s_nx();
                let model = ObservationModel::new(default_samples(load), self.cfg.e, self.rng.random())
                    .expect("validated sample count and error");
                let est = observe(self.states[i].policy, &model);
                self.states[i].reputation = Reputation::new(est.r_hat).expect("fraction");
            } else {
                self.states[i].reputation = self.states[i].policy.into();
            }

            let derived = derive_profile(&self.cfg, &self.states, i)?;
            let alone = self.states.iter().all(|s| s.id == i || s.opted_out);
            let result = solve(self.cfg.mech, &derived.profile, &self.cfg.solver_cfg)?;
            let node = &mut self.states[i];
            match result.status {
                // with every peer gone there is no network left to serve the node
                _ if alone => {
                    node.policy = Policy::ZERO;
                    node.opted_out = true;
                }
                SolveStatus::Interior => {
                    node.policy = result.adopted_policy();
                    node.cumulative_utility += result.adopted_utility();
                }
                SolveStatus::OptOut | SolveStatus::Infeasible => {
                    node.policy = Policy::ZERO;
                    node.opted_out = true;
                }
            }
            if !noisy {
                node.reputation = node.policy.into();
            }
        }
        Ok(self.metrics())
    }

    fn metrics(&self) -> RoundMetrics {
        let n = self.states.len() as f64;
        let mut offered = 0.0;
        let mut delivered = 0.0;
        for s in self.states.iter().filter(|s| !s.opted_out) {
            offered += s.demand;
            delivered += s.demand * network_policy(self.cfg.mech, s.reputation);
        }
        RoundMetrics {
            round: self.round,
            mean_policy: self.states.iter().map(|s| s.policy.value()).sum::<f64>() / n,
            opted_out_count: self.states.iter().filter(|s| s.opted_out).count(),
            delivered,
            offered,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub metrics: Vec<RoundMetrics>,
    pub final_states: Vec<NodeState>,
    /// Last round that changed anything, once a later round confirmed the
    /// fixed point; 0 when the starting state was already fixed.
    pub converged_at: Option<usize>,
}

/// Steps until `cfg.rounds` rounds have run or a round leaves every policy
/// within one grid step and every opt-out flag unchanged.
pub fn run(cfg: &SimConfig) -> Result<SimOutcome, SimError> {
    let mut sim = Simulation::new(cfg.clone())?;
    let tol = cfg.solver_cfg.grid_step;
    let mut metrics = Vec::new();
    let mut converged_at = None;
    for _ in 0..cfg.rounds {
        let before = sim.states.clone();
        metrics.push(sim.step()?);
        let unchanged = before
            .iter()
            .zip(&sim.states)
            .all(|(a, b)| a.opted_out == b.opted_out && (a.policy.value() - b.policy.value()).abs() <= tol);
        if unchanged {
            converged_at = Some(sim.round - 1);
            break;
        }
    }
    Ok(SimOutcome {
        metrics,
        final_states: sim.states,
        converged_at,
    })
}
