//! Collision exclusion: removes from an agent's candidate set every target
//! that lies on another body, in the shadow behind it, or against a wall or
//! obstacle.

use std::f64::consts::FRAC_PI_2;

use crate::engine::SpatialIndex;
use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::geometry::{
    atan2_paper, distance, path_clear, point_path_distance, point_segment_distance, wrap_angle,
    Segment, Vec2,
};
use crate::model::{AgentState, Candidate};

/// Another agent within interaction range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: u32,
    /// Slot of the neighbor in the snapshot.
    pub slot: usize,
    /// The neighbor's position image closest to the observing agent.
    pub position: Vec2,
    /// Mean of the two body diameters: the minimum center separation.
    pub b_sum: f64,
}

/// Distance, bearing and angular half-width of a neighbor's body as seen
/// from the observing agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowParams {
    pub d: f64,
    pub psi: f64,
    pub delta_psi: f64,
    pub b_sum: f64,
}

/// Read-only view of the tick-t state used for perception.
#[derive(Debug, Clone, Copy)]
pub struct Surroundings<'a> {
    pub agents: &'a [AgentState],
    pub index: &'a SpatialIndex,
    pub env: &'a Environment,
    /// Largest body diameter present in `agents`.
    pub max_body: f64,
}

impl<'a> Surroundings<'a> {
    /// Neighbors `j ≠ i` with `|s_i − s_j| < l_i + b_ij` (minimum image).
    pub fn nearby_people(&self, agent: &AgentState) -> Vec<Neighbor> {
        let reach = agent.desired_step + (agent.gait.body_diameter + self.max_body) / 2.0;
        let mut out = Vec::new();
        self.index.query(agent.position, reach, |slot| {
            let other = &self.agents[slot];
            if other.id == agent.id {
                return;
            }
            let b_sum = (agent.gait.body_diameter + other.gait.body_diameter) / 2.0;
            let offset = self.env.min_image(other.position - agent.position);
            if offset.norm() < agent.desired_step + b_sum {
                out.push(Neighbor {
                    id: other.id,
                    slot,
                    position: agent.position + offset,
                    b_sum,
                });
            }
        });
        out.sort_unstable_by_key(|n| n.id);
        out
    }
}

/// Shadow geometry of `neighbor` seen from `agent_pos`. The half-width is
/// clamped to π/2 when the bodies touch or overlap.
pub fn shadow_params(agent_pos: Vec2, neighbor: &Neighbor, agent_id: u32) -> Result<ShadowParams> {
    let rel = neighbor.position - agent_pos;
    let d = distance(agent_pos, neighbor.position);
    if d == 0.0 {
        return Err(Error::CoincidentAgents(agent_id, neighbor.id));
    }
    let psi = atan2_paper(rel.x, rel.y)?;
    let delta_psi = if neighbor.b_sum >= d {
        FRAC_PI_2
    } else {
        (neighbor.b_sum / d).asin()
    };
    Ok(ShadowParams {
        d,
        psi,
        delta_psi,
        b_sum: neighbor.b_sum,
    })
}

/// Point lies on (or touches) the neighbor's body: `|p − s_j| ≤ b_ij`.
pub fn in_body(point: Vec2, neighbor_pos: Vec2, b_sum: f64) -> bool {
    distance(point, neighbor_pos) <= b_sum
}

/// Point lies in the shadow cast by a neighbor: farther than `d·cos Δψ`
/// and within `Δψ` of the neighbor's bearing.
pub fn in_rear(point: Vec2, agent_pos: Vec2, shadow: &ShadowParams) -> bool {
    if distance(point, agent_pos) <= shadow.d * shadow.delta_psi.cos() {
        return false;
    }
    let rel = point - agent_pos;
    match atan2_paper(rel.x, rel.y) {
        Ok(bearing) => wrap_angle(bearing - shadow.psi).abs() <= shadow.delta_psi,
        Err(_) => false,
    }
}

/// Target (or the straight path to it) comes closer than half a body
/// diameter to a wall or obstacle.
pub fn blocked_by_environment(agent: &AgentState, target: Vec2, env: &Environment) -> bool {
    let clearance = agent.gait.body_diameter / 2.0;
    let from = agent.position;
    if env.wall_images().any(|w| !path_clear(from, target, w, clearance)) {
        return true;
    }
    env.obstacles.iter().any(|o| {
        let center = from + env.min_image(o.center - from);
        point_path_distance(center, from, target) < o.radius + clearance
    })
}

/// Precomputed exclusion geometry for one agent on one tick.
///
/// Walls and obstacles farther than `desired_step + b_i/2` from the agent
/// cannot block any candidate and are dropped up front.
#[derive(Debug, Clone)]
pub struct CollisionSet {
    position: Vec2,
    clearance: f64,
    shadows: Vec<(Vec2, ShadowParams)>,
    walls: Vec<Segment>,
    /// Obstacle centers (nearest image) with inflated radii.
    obstacles: Vec<(Vec2, f64)>,
}

impl CollisionSet {
    pub fn new(agent: &AgentState, neighbors: &[Neighbor], env: &Environment) -> Result<Self> {
        let shadows = neighbors
            .iter()
            .map(|n| Ok((n.position, shadow_params(agent.position, n, agent.id)?)))
            .collect::<Result<Vec<_>>>()?;
        let from = agent.position;
        let clearance = agent.gait.body_diameter / 2.0;
        let reach = agent.desired_step + clearance;
        let walls = env
            .wall_images()
            .filter(|w| point_segment_distance(from, *w) <= reach)
            .collect();
        let obstacles = env
            .obstacles
            .iter()
            .map(|o| (from + env.min_image(o.center - from), o.radius + clearance))
            .filter(|(c, r)| distance(from, *c) <= agent.desired_step + r)
            .collect();
        Ok(CollisionSet {
            position: from,
            clearance,
            shadows,
            walls,
            obstacles,
        })
    }

    /// Whether a target is outside every body, shadow and environment
    /// exclusion. The agent's current position is always admissible.
    pub fn admits(&self, target: Vec2) -> bool {
        if target == self.position {
            return true;
        }
        for (pos, shadow) in &self.shadows {
            if in_body(target, *pos, shadow.b_sum) || in_rear(target, self.position, shadow) {
                return false;
            }
        }
        let from = self.position;
        self.walls.iter().all(|w| path_clear(from, target, *w, self.clearance))
            && self
                .obstacles
                .iter()
                .all(|(c, r)| point_path_distance(*c, from, target) >= *r)
    }
}

/// Keeps the candidates whose targets survive collision exclusion.
pub fn feasible_candidates(
    agent: &AgentState,
    grid: &[Candidate],
    neighbors: &[Neighbor],
    env: &Environment,
) -> Result<Vec<Candidate>> {
    let set = CollisionSet::new(agent, neighbors, env)?;
    Ok(grid
        .iter()
        .filter(|c| c.alpha == 0.0 || set.admits(c.target))
        .copied()
        .collect())
}
