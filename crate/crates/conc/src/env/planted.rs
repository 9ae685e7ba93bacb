//! Synthetic planted-entity testbed.
//!
//! A single agent observes `n_entities` entities per step. Exactly one of
//! them — the *planted* entity, marked by an indicator feature — carries a
//! hidden attribute that fully determines the agent's reward; the rest are
//! i.i.d. noise. A score function that learns anything useful here must
//! learn to rank the planted entity first, which makes the environment a
//! sharp probe of whether the motivational subnetwork actually trains the
//! concentration preference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_positive, EntityKind, EntityObservation, Environment, ObservationArray, Outcome,
    StepResult,
};
use crate::Result;

pub const FEATURE_LEN: usize = 5;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PlantedConfig {
    /// Total entities per step, planted one included.
    pub n_entities: usize,
    /// Fixed episode length in steps.
    pub episode_len: usize,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig { n_entities: 17, episode_len: 4 }
    }
}

/// See the module docs. Feature layout per entity:
/// `[attribute, planted marker, noise, noise, noise]`; the self record uses
/// the first noise channel for the remaining-time fraction.
pub struct PlantedEnv {
    cfg: PlantedConfig,
    rng: ChaCha8Rng,
    t: usize,
    attr: f64,
    planted_slot: usize,
    entity_attrs: Vec<f64>,
    done: bool,
}

impl PlantedEnv {
    pub fn new(cfg: PlantedConfig) -> Result<Self> {
        check_positive(cfg.n_entities, "n_entities")?;
        check_positive(cfg.episode_len, "episode_len")?;
        Ok(PlantedEnv {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(0),
            t: 0,
            attr: 0.0,
            planted_slot: 0,
            entity_attrs: Vec::new(),
            done: true,
        })
    }

    /// Entity id of the planted entity in the current episode.
    pub fn planted_id(&self) -> usize {
        self.planted_slot + 1
    }

    /// Hidden reward attribute of the current episode.
    pub fn attribute(&self) -> f64 {
        self.attr
    }

    pub fn config(&self) -> &PlantedConfig {
        &self.cfg
    }

    fn observe(&mut self) -> ObservationArray {
        let remaining = (self.cfg.episode_len - self.t) as f64 / self.cfg.episode_len as f64;
        let self_obs = EntityObservation {
            entity_id: 0,
            kind: EntityKind::SelfEntity,
            features: vec![0.0, 0.0, remaining, 0.0, 0.0],
        };
        let entity_obs = (0..self.cfg.n_entities)
            .map(|slot| {
                let marker = if slot == self.planted_slot { 1.0 } else { 0.0 };
                EntityObservation {
                    entity_id: slot + 1,
                    kind: EntityKind::Opponent,
                    features: vec![
                        self.entity_attrs[slot],
                        marker,
                        self.rng.gen_range(-1.0..1.0),
                        self.rng.gen_range(-1.0..1.0),
                        self.rng.gen_range(-1.0..1.0),
                    ],
                }
            })
            .collect();
        ObservationArray { self_obs, entity_obs }
    }
}

impl Environment for PlantedEnv {
    fn reset(&mut self, seed: u64) -> Result<Vec<ObservationArray>> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.t = 0;
        self.done = false;
        self.attr = self.rng.gen_range(-1.0..1.0);
        self.planted_slot = self.rng.gen_range(0..self.cfg.n_entities);
        self.entity_attrs = (0..self.cfg.n_entities)
            .map(|slot| {
                if slot == self.planted_slot {
                    self.attr
                } else {
                    self.rng.gen_range(-1.0..1.0)
                }
            })
            .collect();
        Ok(vec![self.observe()])
    }

    fn step(&mut self, _actions: &[usize]) -> Result<(Vec<ObservationArray>, StepResult)> {
        debug_assert!(!self.done, "step after episode end");
        self.t += 1;
        self.done = self.t >= self.cfg.episode_len;
        let result = StepResult {
            rewards: vec![self.attr],
            alive: vec![true],
            episode_done: self.done,
            outcome: if self.done { Outcome::Draw } else { Outcome::Ongoing },
        };
        Ok((vec![self.observe()], result))
    }

    fn n_agents(&self) -> usize {
        1
    }

    fn feature_len(&self) -> usize {
        FEATURE_LEN
    }
}

/// Build and seed a planted environment in one call.
pub fn make_planted_env(cfg: PlantedConfig, seed: u64) -> Result<PlantedEnv> {
    let mut env = PlantedEnv::new(cfg)?;
    env.reset(seed)?;
    Ok(env)
}
