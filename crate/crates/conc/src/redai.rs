//! Scripted opponent controller.
//!
//! The red team cheats: it reads the full world state, ignores observation
//! interference, and rotates weapons instantly. Each step it re-derives a
//! fresh plan — cluster both teams with k-means, associate each red group
//! with the nearest blue group, then assign every red agent an individual
//! target inside the associated group with the Hungarian algorithm — and
//! charges the target along the dominant axis.

use crate::dca::{Action, DcaConfig, Team, WorldState};

pub mod hungarian;
pub mod kmeans;

pub use hungarian::hungarian;
pub use kmeans::kmeans;

/// One scripted agent's decision for a step: a movement action plus a weapon
/// bearing that is applied directly (no rotation-rate limit).
#[derive(Clone, Copy, Debug)]
pub struct RedCommand {
    pub agent: usize,
    pub movement: Action,
    pub weapon_angle: f64,
}

/// Group-to-group association: each red group is mapped to the blue group
/// with the nearest centroid, greedily by ascending distance, and no blue
/// group absorbs more than ⌈|red groups| / |blue groups|⌉ red groups.
pub fn associate_groups(red_centroids: &[[f64; 2]], blue_centroids: &[[f64; 2]]) -> Vec<usize> {
    assert!(!red_centroids.is_empty() && !blue_centroids.is_empty());
    let capacity = red_centroids.len().div_ceil(blue_centroids.len());
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (r, rc) in red_centroids.iter().enumerate() {
        for (b, bc) in blue_centroids.iter().enumerate() {
            let d = (rc[0] - bc[0]).hypot(rc[1] - bc[1]);
            pairs.push((d, r, b));
        }
    }
    pairs.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let mut map = vec![usize::MAX; red_centroids.len()];
    let mut load = vec![0usize; blue_centroids.len()];
    for (_, r, b) in pairs {
        if map[r] == usize::MAX && load[b] < capacity {
            map[r] = b;
            load[b] += 1;
        }
    }
    map
}

fn centroid(points: &[[f64; 2]], members: &[usize]) -> [f64; 2] {
    let mut c = [0.0, 0.0];
    for &i in members {
        c[0] += points[i][0];
        c[1] += points[i][1];
    }
    c[0] /= members.len() as f64;
    c[1] /= members.len() as f64;
    c
}

fn mix_seed(seed: u64, t: u32, tag: u64) -> u64 {
    let mut z = seed ^ (t as u64).wrapping_mul(0x9e3779b97f4a7c15) ^ tag.wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stateless between steps apart from the episode seed that makes the
/// per-step k-means runs reproducible.
pub struct RedController {
    seed: u64,
}

impl RedController {
    pub fn new(seed: u64) -> Self {
        RedController { seed }
    }

    /// Recompute the full group assignment for the current state and emit
    /// one command per alive red agent. With no alive blue agents everyone
    /// idles.
    pub fn policy_step(&mut self, world: &WorldState, cfg: &DcaConfig) -> Vec<RedCommand> {
        let red_ids: Vec<usize> = world
            .agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.alive && a.team == Team::Red)
            .map(|(i, _)| i)
            .collect();
        let blue_ids: Vec<usize> = world
            .agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.alive && a.team == Team::Blue)
            .map(|(i, _)| i)
            .collect();
        if red_ids.is_empty() {
            return Vec::new();
        }
        if blue_ids.is_empty() {
            return red_ids
                .iter()
                .map(|&i| RedCommand {
                    agent: i,
                    movement: Action::Idle,
                    weapon_angle: world.agents[i].weapon_angle,
                })
                .collect();
        }

        let red_pts: Vec<[f64; 2]> = red_ids.iter().map(|&i| world.agents[i].pos).collect();
        let blue_pts: Vec<[f64; 2]> = blue_ids.iter().map(|&i| world.agents[i].pos).collect();
        let group = cfg.red_group_size.max(1);
        let k_red = red_pts.len().div_ceil(group).max(1);
        let k_blue = blue_pts.len().div_ceil(group).max(1);

        let red_groups = kmeans(&red_pts, k_red, mix_seed(self.seed, world.t, 0), 20);
        let blue_groups = kmeans(&blue_pts, k_blue, mix_seed(self.seed, world.t, 1), 20);
        let red_centroids: Vec<[f64; 2]> =
            red_groups.iter().map(|g| centroid(&red_pts, g)).collect();
        let blue_centroids: Vec<[f64; 2]> =
            blue_groups.iter().map(|g| centroid(&blue_pts, g)).collect();
        let group_map = associate_groups(&red_centroids, &blue_centroids);

        // agent_targets: red agent id -> blue agent id
        let mut targets: Vec<(usize, usize)> = Vec::with_capacity(red_ids.len());
        for (g, members) in red_groups.iter().enumerate() {
            let prey = &blue_groups[group_map[g]];
            let cost: Vec<Vec<f64>> = members
                .iter()
                .map(|&m| {
                    prey.iter()
                        .map(|&p| {
                            let a = red_pts[m];
                            let b = blue_pts[p];
                            (a[0] - b[0]).hypot(a[1] - b[1])
                        })
                        .collect()
                })
                .collect();
            let assignment = hungarian(&cost);
            let mut assigned = vec![false; members.len()];
            for (row, col) in assignment {
                targets.push((red_ids[members[row]], blue_ids[prey[col]]));
                assigned[row] = true;
            }
            // Surplus agents in an oversized group chase the nearest target.
            for (row, &m) in members.iter().enumerate() {
                if assigned[row] {
                    continue;
                }
                let nearest = prey
                    .iter()
                    .min_by(|&&a, &&b| {
                        let da = dist2(red_pts[m], blue_pts[a]);
                        let db = dist2(red_pts[m], blue_pts[b]);
                        da.partial_cmp(&db).expect("finite")
                    })
                    .expect("prey group is non-empty");
                targets.push((red_ids[m], blue_ids[*nearest]));
            }
        }
        targets.sort_by_key(|&(agent, _)| agent);

        targets
            .into_iter()
            .map(|(agent, target)| {
                let a = world.agents[agent].pos;
                let b = world.agents[target].pos;
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let movement = if dx.abs() >= dy.abs() {
                    if dx >= 0.0 { Action::AccelPosX } else { Action::AccelNegX }
                } else if dy >= 0.0 {
                    Action::AccelPosY
                } else {
                    Action::AccelNegY
                };
                RedCommand { agent, movement, weapon_angle: dy.atan2(dx) }
            })
            .collect()
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}
