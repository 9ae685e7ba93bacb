//! Entity-oriented environment contract.
//!
//! An agent's observation is its own record plus a variable-length list of
//! per-entity records; the observation function may be stochastic (entities
//! can drop out step to step), and the roster of alive agents shrinks over
//! an episode. Everything downstream — networks, trainer, probes — works
//! against this contract.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub mod planted;

/// How an observed entity relates to the observer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    SelfEntity,
    Ally,
    Opponent,
}

/// One observed entity: a fixed-length feature vector plus identity.
///
/// The feature layout is fixed per environment; for the combat simulator it
/// is `[pos(2, egocentric), vel(2), weapon dir(2), terrain(1), team(2),
/// alive(1)]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityObservation {
    pub entity_id: usize,
    pub kind: EntityKind,
    pub features: Vec<f64>,
}

/// An agent's observation: itself plus every entity it saw this step.
///
/// The self record is structural — an agent always observes itself — while
/// `entity_obs` varies in length per step and never contains the observer or
/// a dead entity. Entities are kept in ascending `entity_id` order so runs
/// are reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationArray {
    pub self_obs: EntityObservation,
    pub entity_obs: Vec<EntityObservation>,
}

impl ObservationArray {
    /// Restore the canonical ascending-id order (after external shuffling,
    /// e.g. in tests).
    pub fn canonicalize(&mut self) {
        self.entity_obs.sort_by_key(|e| e.entity_id);
    }
}

/// Episode status after a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ongoing,
    BlueWin,
    RedWin,
    Draw,
}

/// Per-step result for the policy-controlled team.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepResult {
    /// Reward for each policy agent this step.
    pub rewards: Vec<f64>,
    /// Alive flags after the step; once false, never true again.
    pub alive: Vec<bool>,
    pub episode_done: bool,
    pub outcome: Outcome,
}

/// Contract every environment implements.
///
/// `reset(seed)` is a deterministic function of `(config, seed)`; an
/// instance is single-threaded and owns its random stream, with parallelism
/// happening across instances.
pub trait Environment: Send {
    /// Start a fresh episode; all agents alive.
    fn reset(&mut self, seed: u64) -> Result<Vec<ObservationArray>>;

    /// Advance one step given the policy team's joint actions (entries for
    /// dead agents are ignored).
    fn step(&mut self, actions: &[usize]) -> Result<(Vec<ObservationArray>, StepResult)>;

    /// Number of policy-controlled agents.
    fn n_agents(&self) -> usize;

    /// Length of every entity feature vector in this environment.
    fn feature_len(&self) -> usize;

    /// Number of discrete actions.
    fn n_actions(&self) -> usize {
        7
    }
}

pub(crate) fn check_positive(value: usize, what: &str) -> Result<()> {
    if value == 0 {
        return Err(Error::Config(format!("{what} must be at least 1")));
    }
    Ok(())
}
