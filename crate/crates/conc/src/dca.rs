//! Decentralized Collective Assault: continuous 2D two-team combat.
//!
//! Blue agents are policy-controlled and observe nearby entities through a
//! lossy channel (each in-radius entity independently drops out with
//! probability `p_b`); the scripted red team reads the full world state.
//! Weapons are terrain-scaled fan areas: standing on higher ground extends
//! the fire radius. A team wins by wiping out the opponent or by having more
//! survivors at the step limit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{
    EntityKind, EntityObservation, Environment, ObservationArray, Outcome, StepResult,
};
use crate::redai::RedController;
use crate::{Error, Result};

/// Entity feature vector length: egocentric position (2), velocity (2),
/// weapon direction (2), terrain height (1), team one-hot (2), alive (1).
pub const FEATURE_LEN: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Team {
    Blue,
    Red,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct DcaConfig {
    pub n_blue: usize,
    pub n_red: usize,
    /// Per-entity, per-step probability that an in-radius entity is dropped
    /// from a blue agent's observation.
    pub p_b: f64,
    /// Observation radius (map units).
    pub r_w: f64,
    /// Base fire radius on flat terrain.
    pub l_o: f64,
    /// Half opening angle of the weapon fan, radians.
    pub fan_half_angle: f64,
    /// Terrain undulation strength.
    pub lambda_a: f64,
    /// Terrain center-bowl strength.
    pub lambda_b: f64,
    pub max_steps: u32,
    /// Velocity gained per acceleration action, map units per step².
    pub accel: f64,
    /// Speed cap, map units per step.
    pub speed_cap: f64,
    /// Blue weapon rotation limit per step, degrees.
    pub rot_limit_blue_deg: f64,
    /// Target size of the scripted opponent's k-means groups.
    pub red_group_size: usize,
}

impl Default for DcaConfig {
    fn default() -> Self {
        DcaConfig {
            n_blue: 10,
            n_red: 10,
            p_b: 0.05,
            r_w: 7.0,
            l_o: 1.5,
            fan_half_angle: 60f64.to_radians(),
            lambda_a: 0.05,
            lambda_b: 0.2,
            max_steps: 200,
            accel: 0.05,
            speed_cap: 0.25,
            rot_limit_blue_deg: 10.0,
            red_group_size: 10,
        }
    }
}

/// Half-width of the square arena; terrain scalings assume this extent.
pub const MAP_HALF: f64 = 10.0;
/// Keeps the terrain height inside the open interval (0, 2).
pub const HEIGHT_CLAMP: f64 = 0.01;

impl DcaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_blue == 0 {
            return Err(Error::Config("n_blue must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.p_b) {
            return Err(Error::Config(format!("p_b must be in [0,1), got {}", self.p_b)));
        }
        if self.r_w <= 0.0 || self.l_o <= 0.0 {
            return Err(Error::Config("radii must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_total(&self) -> usize {
        self.n_blue + self.n_red
    }

    pub fn rot_limit_blue(&self) -> f64 {
        self.rot_limit_blue_deg.to_radians()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AgentBody {
    pub pos: [f64; 2],
    pub vel: [f64; 2],
    pub weapon_angle: f64,
    pub team: Team,
    pub alive: bool,
}

/// Full simulator state. The episode RNG lives in the environment wrapper so
/// the state itself stays a plain value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorldState {
    pub agents: Vec<AgentBody>,
    pub t: u32,
}

impl WorldState {
    pub fn alive_count(&self, team: Team) -> usize {
        self.agents.iter().filter(|a| a.alive && a.team == team).count()
    }
}

/// The seven discrete actions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Idle,
    AccelPosX,
    AccelNegX,
    AccelPosY,
    AccelNegY,
    RotateCw,
    RotateCcw,
}

pub const NUM_ACTIONS: usize = 7;

impl Action {
    pub fn from_index(idx: usize) -> Result<Action> {
        use Action::*;
        Ok(match idx {
            0 => Idle,
            1 => AccelPosX,
            2 => AccelNegX,
            3 => AccelPosY,
            4 => AccelNegY,
            5 => RotateCw,
            6 => RotateCcw,
            _ => return Err(Error::Config(format!("action index {idx} out of range 0..7"))),
        })
    }
}

/// Rastrigin-like terrain height, unclamped.
pub fn terrain_height(x: f64, y: f64, lambda_a: f64, lambda_b: f64) -> f64 {
    1.0 + lambda_a * ((3.0 * std::f64::consts::PI * x / 5.0).cos() + (std::f64::consts::PI * y).cos())
        - lambda_b * ((x / 10.0).powi(2) + (y / 10.0).powi(2))
}

/// Terrain height clamped to the open interval (0, 2).
pub fn clamped_height(x: f64, y: f64, cfg: &DcaConfig) -> f64 {
    terrain_height(x, y, cfg.lambda_a, cfg.lambda_b)
        .clamp(HEIGHT_CLAMP, 2.0 - HEIGHT_CLAMP)
}

/// Terrain-scaled fire radius of an agent.
pub fn fire_radius(agent: &AgentBody, cfg: &DcaConfig) -> f64 {
    cfg.l_o * clamped_height(agent.pos[0], agent.pos[1], cfg)
}

/// Wrap an angle difference into [−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    } else if a < -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    }
    a
}

fn clamp_speed(vel: &mut [f64; 2], cap: f64) {
    let speed = (vel[0] * vel[0] + vel[1] * vel[1]).sqrt();
    if speed > cap {
        let s = cap / speed;
        vel[0] *= s;
        vel[1] *= s;
    }
}

/// Apply one action: acceleration adds to velocity (speed-capped), then the
/// position integrates; rotations turn the weapon by the blue per-step limit.
/// Positions are clamped to the arena, zeroing the blocked velocity
/// component.
pub fn apply_action(agent: &mut AgentBody, action: Action, cfg: &DcaConfig) {
    debug_assert!(agent.alive, "dead agents are frozen");
    match action {
        Action::Idle => {}
        Action::AccelPosX => agent.vel[0] += cfg.accel,
        Action::AccelNegX => agent.vel[0] -= cfg.accel,
        Action::AccelPosY => agent.vel[1] += cfg.accel,
        Action::AccelNegY => agent.vel[1] -= cfg.accel,
        Action::RotateCw => agent.weapon_angle = wrap_angle(agent.weapon_angle + cfg.rot_limit_blue()),
        Action::RotateCcw => {
            agent.weapon_angle = wrap_angle(agent.weapon_angle - cfg.rot_limit_blue())
        }
    }
    clamp_speed(&mut agent.vel, cfg.speed_cap);
    for axis in 0..2 {
        agent.pos[axis] += agent.vel[axis];
        if agent.pos[axis] > MAP_HALF {
            agent.pos[axis] = MAP_HALF;
            agent.vel[axis] = 0.0;
        } else if agent.pos[axis] < -MAP_HALF {
            agent.pos[axis] = -MAP_HALF;
            agent.vel[axis] = 0.0;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Kill {
    pub shooter: usize,
    pub victim: usize,
}

/// Evaluate every weapon fan against the pre-step snapshot simultaneously —
/// mutual kills are possible — then clear the victims' alive flags.
pub fn resolve_combat(state: &mut WorldState, cfg: &DcaConfig) -> Vec<Kill> {
    let mut kills = Vec::new();
    for (s, shooter) in state.agents.iter().enumerate() {
        if !shooter.alive {
            continue;
        }
        let radius = fire_radius(shooter, cfg);
        for (v, victim) in state.agents.iter().enumerate() {
            if s == v || !victim.alive || victim.team == shooter.team {
                continue;
            }
            let dx = victim.pos[0] - shooter.pos[0];
            let dy = victim.pos[1] - shooter.pos[1];
            let dist = (dx * dx + dy * dy).sqrt();
            if dist > radius {
                continue;
            }
            let bearing = dy.atan2(dx);
            if wrap_angle(bearing - shooter.weapon_angle).abs() <= cfg.fan_half_angle {
                kills.push(Kill { shooter: s, victim: v });
            }
        }
    }
    for kill in &kills {
        state.agents[kill.victim].alive = false;
    }
    kills
}

/// +1.0 per kill made, −0.5 per hit taken; everyone else zero.
pub fn compute_rewards(kills: &[Kill], n_agents: usize) -> Vec<f64> {
    let mut rewards = vec![0.0; n_agents];
    for kill in kills {
        rewards[kill.shooter] += 1.0;
        rewards[kill.victim] -= 0.5;
    }
    rewards
}

/// Feature vector for `entity` as seen by `observer` (egocentric positions,
/// normalized by the observation radius / speed cap).
pub fn entity_features(observer: &AgentBody, entity: &AgentBody, cfg: &DcaConfig) -> Vec<f64> {
    let same = entity.team == observer.team;
    vec![
        (entity.pos[0] - observer.pos[0]) / cfg.r_w,
        (entity.pos[1] - observer.pos[1]) / cfg.r_w,
        entity.vel[0] / cfg.speed_cap,
        entity.vel[1] / cfg.speed_cap,
        entity.weapon_angle.cos(),
        entity.weapon_angle.sin(),
        clamped_height(entity.pos[0], entity.pos[1], cfg),
        if same { 1.0 } else { 0.0 },
        if same { 0.0 } else { 1.0 },
        if entity.alive { 1.0 } else { 0.0 },
    ]
}

fn self_features(agent: &AgentBody, cfg: &DcaConfig) -> Vec<f64> {
    vec![
        0.0,
        0.0,
        agent.vel[0] / cfg.speed_cap,
        agent.vel[1] / cfg.speed_cap,
        agent.weapon_angle.cos(),
        agent.weapon_angle.sin(),
        clamped_height(agent.pos[0], agent.pos[1], cfg),
        0.0,
        0.0,
        if agent.alive { 1.0 } else { 0.0 },
    ]
}

/// Observation of agent `i` through the interference channel: every alive
/// entity within `r_w` is included independently with probability `1 − p_b`.
/// Only the policy team observes through this path; the scripted opponent
/// reads the state directly.
pub fn observe_with_interference<R: Rng>(
    state: &WorldState,
    agent_i: usize,
    cfg: &DcaConfig,
    rng: &mut R,
) -> ObservationArray {
    let me = &state.agents[agent_i];
    let self_obs = EntityObservation {
        entity_id: agent_i,
        kind: EntityKind::SelfEntity,
        features: self_features(me, cfg),
    };
    let mut entity_obs = Vec::new();
    for (j, other) in state.agents.iter().enumerate() {
        if j == agent_i || !other.alive {
            continue;
        }
        let dx = other.pos[0] - me.pos[0];
        let dy = other.pos[1] - me.pos[1];
        if (dx * dx + dy * dy).sqrt() > cfg.r_w {
            continue;
        }
        // One uniform draw per candidate keeps the stream aligned across
        // interference levels.
        if rng.gen::<f64>() < cfg.p_b {
            continue;
        }
        entity_obs.push(EntityObservation {
            entity_id: j,
            kind: if other.team == me.team { EntityKind::Ally } else { EntityKind::Opponent },
            features: entity_features(me, other, cfg),
        });
    }
    ObservationArray { self_obs, entity_obs }
}

fn flagged_dead_observation(agent_i: usize, cfg: &DcaConfig) -> ObservationArray {
    let mut features = vec![0.0; FEATURE_LEN];
    features[FEATURE_LEN - 1] = 0.0;
    let _ = cfg;
    ObservationArray {
        self_obs: EntityObservation {
            entity_id: agent_i,
            kind: EntityKind::SelfEntity,
            features,
        },
        entity_obs: Vec::new(),
    }
}

/// Win/draw conditions: wiping out the opponent wins immediately; at the
/// step limit the side with more survivors wins and equal counts draw.
pub fn check_termination(state: &WorldState, cfg: &DcaConfig) -> Outcome {
    let blue = state.alive_count(Team::Blue);
    let red = state.alive_count(Team::Red);
    if blue == 0 && red == 0 {
        return Outcome::Draw;
    }
    if red == 0 {
        return Outcome::BlueWin;
    }
    if blue == 0 {
        return Outcome::RedWin;
    }
    if state.t >= cfg.max_steps {
        return match blue.cmp(&red) {
            std::cmp::Ordering::Greater => Outcome::BlueWin,
            std::cmp::Ordering::Less => Outcome::RedWin,
            std::cmp::Ordering::Equal => Outcome::Draw,
        };
    }
    Outcome::Ongoing
}

/// The DCA environment: world state, episode RNG, scripted opponent.
pub struct DcaEnv {
    cfg: DcaConfig,
    world: WorldState,
    rng: ChaCha8Rng,
    red: RedController,
    done: bool,
}

impl DcaEnv {
    pub fn new(cfg: DcaConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(DcaEnv {
            cfg,
            world: WorldState { agents: Vec::new(), t: 0 },
            rng: ChaCha8Rng::seed_from_u64(0),
            red: RedController::new(0),
            done: true,
        })
    }

    pub fn config(&self) -> &DcaConfig {
        &self.cfg
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    fn spawn(&mut self) {
        let mut agents = Vec::with_capacity(self.cfg.n_total());
        for _ in 0..self.cfg.n_blue {
            agents.push(AgentBody {
                pos: [self.rng.gen_range(-8.0..-2.0), self.rng.gen_range(-8.0..8.0)],
                vel: [0.0, 0.0],
                weapon_angle: 0.0,
                team: Team::Blue,
                alive: true,
            });
        }
        for _ in 0..self.cfg.n_red {
            agents.push(AgentBody {
                pos: [self.rng.gen_range(2.0..8.0), self.rng.gen_range(-8.0..8.0)],
                vel: [0.0, 0.0],
                weapon_angle: std::f64::consts::PI,
                team: Team::Red,
                alive: true,
            });
        }
        self.world = WorldState { agents, t: 0 };
    }

    fn observations(&mut self) -> Vec<ObservationArray> {
        (0..self.cfg.n_blue)
            .map(|i| {
                if self.world.agents[i].alive {
                    observe_with_interference(&self.world, i, &self.cfg, &mut self.rng)
                } else {
                    flagged_dead_observation(i, &self.cfg)
                }
            })
            .collect()
    }

    pub fn outcome(&self) -> Outcome {
        check_termination(&self.world, &self.cfg)
    }
}

impl Environment for DcaEnv {
    fn reset(&mut self, seed: u64) -> Result<Vec<ObservationArray>> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.red = RedController::new(seed);
        self.spawn();
        self.done = false;
        Ok(self.observations())
    }

    fn step(&mut self, actions: &[usize]) -> Result<(Vec<ObservationArray>, StepResult)> {
        if actions.len() != self.cfg.n_blue {
            return Err(Error::Config(format!(
                "expected {} blue actions, got {}",
                self.cfg.n_blue,
                actions.len()
            )));
        }
        debug_assert!(!self.done, "step after episode end");

        // Scripted commands are a function of the pre-move snapshot.
        let red_cmds = self.red.policy_step(&self.world, &self.cfg);

        for i in 0..self.cfg.n_blue {
            if self.world.agents[i].alive {
                let action = Action::from_index(actions[i])?;
                apply_action(&mut self.world.agents[i], action, &self.cfg);
            }
        }
        for cmd in &red_cmds {
            let agent = &mut self.world.agents[cmd.agent];
            if agent.alive {
                apply_action(agent, cmd.movement, &self.cfg);
                // The scripted opponent has no rotation limit.
                agent.weapon_angle = cmd.weapon_angle;
            }
        }

        let kills = resolve_combat(&mut self.world, &self.cfg);
        let all_rewards = compute_rewards(&kills, self.cfg.n_total());
        self.world.t += 1;

        let outcome = check_termination(&self.world, &self.cfg);
        self.done = outcome != Outcome::Ongoing;
        let result = StepResult {
            rewards: all_rewards[..self.cfg.n_blue].to_vec(),
            alive: (0..self.cfg.n_blue).map(|i| self.world.agents[i].alive).collect(),
            episode_done: self.done,
            outcome,
        };
        Ok((self.observations(), result))
    }

    fn n_agents(&self) -> usize {
        self.cfg.n_blue
    }

    fn feature_len(&self) -> usize {
        FEATURE_LEN
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(x: f64, y: f64, angle: f64, team: Team) -> AgentBody {
        AgentBody { pos: [x, y], vel: [0.0, 0.0], weapon_angle: angle, team, alive: true }
    }

    #[test]
    fn terrain_at_origin_matches_analytic_value() {
        let h = terrain_height(0.0, 0.0, 0.05, 0.2);
        assert!((h - 1.10).abs() < 1e-12);
    }

    #[test]
    fn flat_terrain_is_identically_one() {
        for &(x, y) in &[(0.0, 0.0), (3.3, -7.1), (9.9, 9.9)] {
            assert_eq!(terrain_height(x, y, 0.0, 0.0), 1.0);
        }
    }

    #[test]
    fn terrain_is_even_in_both_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = rng.gen_range(-10.0..10.0);
            let y = rng.gen_range(-10.0..10.0);
            let a = terrain_height(x, y, 0.05, 0.2);
            let b = terrain_height(-x, -y, 0.05, 0.2);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fire_radius_on_flat_terrain_is_the_base_radius() {
        let cfg = DcaConfig { lambda_a: 0.0, lambda_b: 0.0, ..DcaConfig::default() };
        let agent = body(1.0, 2.0, 0.0, Team::Blue);
        assert!((fire_radius(&agent, &cfg) - cfg.l_o).abs() < 1e-12);
    }

    #[test]
    fn fire_radius_at_origin_uses_the_height_factor() {
        let cfg = DcaConfig::default();
        let agent = body(0.0, 0.0, 0.0, Team::Blue);
        assert!((fire_radius(&agent, &cfg) - 1.10 * cfg.l_o).abs() < 1e-12);
    }

    #[test]
    fn higher_ground_strictly_outranges_lower_ground() {
        let cfg = DcaConfig::default();
        // Origin is a local bump; (5/3, 1) flips both cosines to −1.
        let high = body(0.0, 0.0, 0.0, Team::Blue);
        let low = body(5.0 / 3.0, 1.0, 0.0, Team::Blue);
        assert!(fire_radius(&high, &cfg) > fire_radius(&low, &cfg));
    }

    #[test]
    fn idle_from_rest_stays_put() {
        let cfg = DcaConfig::default();
        let mut agent = body(1.0, 1.0, 0.0, Team::Blue);
        apply_action(&mut agent, Action::Idle, &cfg);
        assert_eq!(agent.pos, [1.0, 1.0]);
    }

    #[test]
    fn blue_rotation_moves_exactly_ten_degrees() {
        let cfg = DcaConfig::default();
        let mut agent = body(0.0, 0.0, 0.3, Team::Blue);
        apply_action(&mut agent, Action::RotateCw, &cfg);
        assert!((agent.weapon_angle - (0.3 + 10f64.to_radians())).abs() < 1e-12);
        apply_action(&mut agent, Action::RotateCcw, &cfg);
        assert!((agent.weapon_angle - 0.3).abs() < 1e-12);
    }

    #[test]
    fn repeated_acceleration_matches_discrete_kinematics() {
        let cfg = DcaConfig::default();
        let mut agent = body(0.0, 0.0, 0.0, Team::Blue);
        let k = 12;
        for _ in 0..k {
            apply_action(&mut agent, Action::AccelPosX, &cfg);
        }
        // Hand integration: v_t = min(t·a, cap), x = Σ v_t.
        let mut v = 0.0;
        let mut x = 0.0;
        for _ in 0..k {
            v = (v + cfg.accel).min(cfg.speed_cap);
            x += v;
        }
        assert!((agent.pos[0] - x).abs() < 1e-12);
        assert!((agent.vel[0] - v).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_action_is_rejected() {
        assert!(Action::from_index(7).is_err());
    }

    #[test]
    fn no_kills_when_no_opponent_is_in_range() {
        let cfg = DcaConfig::default();
        let mut state = WorldState {
            agents: vec![body(-9.0, -9.0, 0.0, Team::Blue), body(9.0, 9.0, 0.0, Team::Red)],
            t: 0,
        };
        assert!(resolve_combat(&mut state, &cfg).is_empty());
    }

    #[test]
    fn opponent_dead_ahead_inside_the_fan_dies() {
        let cfg = DcaConfig { lambda_a: 0.0, lambda_b: 0.0, ..DcaConfig::default() };
        let shooter = body(0.0, 0.0, 0.0, Team::Blue);
        let victim = body(cfg.l_o / 2.0, 0.0, std::f64::consts::PI / 2.0, Team::Red);
        let mut state = WorldState { agents: vec![shooter, victim], t: 0 };
        let kills = resolve_combat(&mut state, &cfg);
        assert_eq!(kills, vec![Kill { shooter: 0, victim: 1 }]);
        assert!(!state.agents[1].alive);
    }

    #[test]
    fn random_states_match_the_brute_force_kill_oracle() {
        let cfg = DcaConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let agents: Vec<AgentBody> = (0..20)
                .map(|i| AgentBody {
                    pos: [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
                    vel: [0.0, 0.0],
                    weapon_angle: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
                    team: if i < 10 { Team::Blue } else { Team::Red },
                    alive: rng.gen_bool(0.9),
                })
                .collect();
            let mut state = WorldState { agents: agents.clone(), t: 0 };
            let kills = resolve_combat(&mut state, &cfg);

            // Independent scalar-math check over all ordered pairs.
            let mut expected = Vec::new();
            for s in 0..20 {
                for v in 0..20 {
                    if s == v || !agents[s].alive || !agents[v].alive {
                        continue;
                    }
                    if agents[s].team == agents[v].team {
                        continue;
                    }
                    let (dx, dy) = (
                        agents[v].pos[0] - agents[s].pos[0],
                        agents[v].pos[1] - agents[s].pos[1],
                    );
                    let dist = dx.hypot(dy);
                    let h = terrain_height(agents[s].pos[0], agents[s].pos[1], 0.05, 0.2)
                        .clamp(0.01, 1.99);
                    if dist > cfg.l_o * h {
                        continue;
                    }
                    let mut diff = dy.atan2(dx) - agents[s].weapon_angle;
                    while diff > std::f64::consts::PI {
                        diff -= std::f64::consts::TAU;
                    }
                    while diff < -std::f64::consts::PI {
                        diff += std::f64::consts::TAU;
                    }
                    if diff.abs() <= cfg.fan_half_angle {
                        expected.push(Kill { shooter: s, victim: v });
                    }
                }
            }
            assert_eq!(kills, expected);
        }
    }

    #[test]
    fn rewards_are_zero_without_kills() {
        assert!(compute_rewards(&[], 5).iter().all(|&r| r == 0.0));
    }

    #[test]
    fn double_kill_earns_two() {
        let kills =
            vec![Kill { shooter: 0, victim: 3 }, Kill { shooter: 0, victim: 4 }];
        let r = compute_rewards(&kills, 5);
        assert_eq!(r[0], 2.0);
        assert_eq!(r[3], -0.5);
        assert_eq!(r[4], -0.5);
    }

    #[test]
    fn mutual_kill_nets_half_each() {
        let kills =
            vec![Kill { shooter: 0, victim: 1 }, Kill { shooter: 1, victim: 0 }];
        let r = compute_rewards(&kills, 2);
        assert_eq!(r, vec![0.5, 0.5]);
    }

    #[test]
    fn zero_interference_observes_every_entity_in_radius() {
        let cfg = DcaConfig { p_b: 0.0, ..DcaConfig::default() };
        let state = WorldState {
            agents: vec![
                body(0.0, 0.0, 0.0, Team::Blue),
                body(1.0, 0.0, 0.0, Team::Blue),
                body(2.0, 0.0, 0.0, Team::Red),
                body(9.9, 9.9, 0.0, Team::Red), // out of radius
            ],
            t: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let obs = observe_with_interference(&state, 0, &cfg, &mut rng);
        let ids: Vec<_> = obs.entity_obs.iter().map(|e| e.entity_id).collect();
        assert_eq!(ids, vec![1, 2]);
        assert_eq!(obs.entity_obs[0].kind, EntityKind::Ally);
        assert_eq!(obs.entity_obs[1].kind, EntityKind::Opponent);
    }

    #[test]
    fn full_interference_leaves_only_the_self_record() {
        let cfg = DcaConfig { p_b: 0.999_999_999, ..DcaConfig::default() };
        let state = WorldState {
            agents: vec![body(0.0, 0.0, 0.0, Team::Blue), body(1.0, 0.0, 0.0, Team::Red)],
            t: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let obs = observe_with_interference(&state, 0, &cfg, &mut rng);
        assert!(obs.entity_obs.is_empty());
        assert_eq!(obs.self_obs.entity_id, 0);
    }

    #[test]
    fn interference_frequency_matches_p_b() {
        let cfg = DcaConfig { p_b: 0.05, ..DcaConfig::default() };
        let state = WorldState {
            agents: vec![body(0.0, 0.0, 0.0, Team::Blue), body(1.0, 0.0, 0.0, Team::Red)],
            t: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(31415);
        let n = 100_000usize;
        let mut seen = 0usize;
        for _ in 0..n {
            seen += observe_with_interference(&state, 0, &cfg, &mut rng).entity_obs.len();
        }
        let p = 0.95;
        let freq = seen as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() <= 3.0 * sigma, "freq {freq}");
    }

    #[test]
    fn egocentric_features_are_relative_to_the_observer() {
        let cfg = DcaConfig::default();
        let me = body(1.0, 2.0, 0.0, Team::Blue);
        let other = body(4.0, 6.0, 0.0, Team::Red);
        let f = entity_features(&me, &other, &cfg);
        assert!((f[0] - 3.0 / cfg.r_w).abs() < 1e-12);
        assert!((f[1] - 4.0 / cfg.r_w).abs() < 1e-12);
    }

    #[test]
    fn termination_rules() {
        let cfg = DcaConfig { max_steps: 10, ..DcaConfig::default() };
        let mut state = WorldState {
            agents: vec![body(0.0, 0.0, 0.0, Team::Blue), body(1.0, 0.0, 0.0, Team::Red)],
            t: 3,
        };
        state.agents[1].alive = false;
        assert_eq!(check_termination(&state, &cfg), Outcome::BlueWin);

        // Timeout with a blue majority.
        let mut agents = Vec::new();
        for _ in 0..10 {
            agents.push(body(0.0, 0.0, 0.0, Team::Blue));
        }
        for i in 0..10 {
            let mut a = body(1.0, 0.0, 0.0, Team::Red);
            a.alive = i < 7;
            agents.push(a);
        }
        let state = WorldState { agents, t: 10 };
        assert_eq!(check_termination(&state, &cfg), Outcome::BlueWin);

        // Timeout with equal survivors is a draw.
        let state = WorldState {
            agents: vec![body(0.0, 0.0, 0.0, Team::Blue), body(1.0, 0.0, 0.0, Team::Red)],
            t: 10,
        };
        assert_eq!(check_termination(&state, &cfg), Outcome::Draw);

        // Both sides wiped simultaneously is a draw too.
        let mut state = WorldState {
            agents: vec![body(0.0, 0.0, 0.0, Team::Blue), body(1.0, 0.0, 0.0, Team::Red)],
            t: 4,
        };
        state.agents[0].alive = false;
        state.agents[1].alive = false;
        assert_eq!(check_termination(&state, &cfg), Outcome::Draw);
    }

    #[test]
    fn reset_is_deterministic() {
        let cfg = DcaConfig::default();
        let mut a = DcaEnv::new(cfg).unwrap();
        let mut b = DcaEnv::new(cfg).unwrap();
        let oa = a.reset(99).unwrap();
        let ob = b.reset(99).unwrap();
        assert_eq!(oa, ob);
    }

    #[test]
    fn zero_blue_is_a_config_error_but_zero_red_is_fine() {
        assert!(DcaEnv::new(DcaConfig { n_blue: 0, ..DcaConfig::default() }).is_err());
        let mut env =
            DcaEnv::new(DcaConfig { n_blue: 1, n_red: 0, ..DcaConfig::default() }).unwrap();
        let obs = env.reset(1).unwrap();
        assert_eq!(obs.len(), 1);
        assert!(obs[0].entity_obs.is_empty());
    }

    #[test]
    fn fifty_vs_fifty_observation_lengths_are_bounded() {
        let cfg = DcaConfig { n_blue: 50, n_red: 50, ..DcaConfig::default() };
        let mut env = DcaEnv::new(cfg).unwrap();
        let obs = env.reset(7).unwrap();
        assert_eq!(obs.len(), 50);
        for o in &obs {
            assert!(o.entity_obs.len() <= 99);
        }
    }

    #[test]
    fn alive_counts_never_increase_and_episodes_replay_exactly() {
        let cfg = DcaConfig {
            n_blue: 4,
            n_red: 4,
            p_b: 0.0,
            max_steps: 60,
            ..DcaConfig::default()
        };
        let mut env = DcaEnv::new(cfg).unwrap();
        env.reset(5).unwrap();
        let mut counts = Vec::new();
        let mut trace = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut actions_log = Vec::new();
        loop {
            let actions: Vec<usize> = (0..4).map(|_| rng.gen_range(0..7)).collect();
            actions_log.push(actions.clone());
            let (_, step) = env.step(&actions).unwrap();
            counts.push((env.world().alive_count(Team::Blue), env.world().alive_count(Team::Red)));
            trace.push(format!("{:?}", env.world()));
            if step.episode_done {
                break;
            }
        }
        for w in counts.windows(2) {
            assert!(w[1].0 <= w[0].0 && w[1].1 <= w[0].1);
        }

        // Replaying the identical action sequence reproduces every state.
        let mut env2 = DcaEnv::new(cfg).unwrap();
        env2.reset(5).unwrap();
        for (i, actions) in actions_log.iter().enumerate() {
            let (_, step) = env2.step(actions).unwrap();
            assert_eq!(format!("{:?}", env2.world()), trace[i]);
            if step.episode_done {
                assert_eq!(i, actions_log.len() - 1);
            }
        }
    }
}
