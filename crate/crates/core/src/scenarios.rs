//! Builders for the corridor and room-with-door setups, and boundary
//! handling (periodic wrap, removal at exits).

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use crate::environment::{Environment, Obstacle};

use crate::engine::{rng_stream, ExitRecord, MoveRecord, SpatialIndex, World, SPAWN_STREAM};
use crate::error::{Error, Result};
use crate::geometry::{segments_intersect, Segment, Vec2};
use crate::model::{AgentState, GaitParams, Goal, ModelParams};

/// Tick value used to key the spawn stream; never reached by a simulation.
const SPAWN_TICK: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// Periodic corridor with unidirectional flow in +x.
    #[default]
    Corridor,
    /// Closed room with a door centered on the right wall.
    Room,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// `[length_x, width_y]` in meters; defaults to 20×5 (corridor) or
    /// 10×10 (room).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<[f64; 2]>,
    /// Door opening (room only), meters.
    pub door_width: f64,
    /// Agents per m²; ignored when `agent_count` is set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent_count: Option<usize>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            kind: ScenarioKind::Corridor,
            dimensions: None,
            door_width: 1.0,
            target_density: None,
            agent_count: None,
        }
    }
}

impl ScenarioSpec {
    pub fn corridor(density: f64) -> Self {
        ScenarioSpec {
            kind: ScenarioKind::Corridor,
            target_density: Some(density),
            ..ScenarioSpec::default()
        }
    }

    pub fn room(door_width: f64) -> Self {
        ScenarioSpec {
            kind: ScenarioKind::Room,
            door_width,
            ..ScenarioSpec::default()
        }
    }

    pub fn dims(&self) -> [f64; 2] {
        self.dimensions.unwrap_or(match self.kind {
            ScenarioKind::Corridor => [20.0, 5.0],
            ScenarioKind::Room => [10.0, 10.0],
        })
    }

    pub fn default_density(&self) -> f64 {
        match self.kind {
            ScenarioKind::Corridor => 1.0,
            ScenarioKind::Room => 3.0,
        }
    }

    pub fn agent_count(&self) -> usize {
        if let Some(n) = self.agent_count {
            return n;
        }
        let [lx, ly] = self.dims();
        let density = self.target_density.unwrap_or_else(|| self.default_density());
        (density * lx * ly).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let [lx, ly] = self.dims();
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidParameter("dimensions must be positive".into()));
        }
        if let Some(d) = self.target_density {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::InvalidParameter("target_density must be >= 0".into()));
            }
        }
        if self.kind == ScenarioKind::Room && !(self.door_width > 0.0 && self.door_width < ly) {
            return Err(Error::InvalidParameter(format!(
                "door_width must lie in (0, {ly})"
            )));
        }
        Ok(())
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x < self.max.x && p.y >= self.min.y && p.y < self.max.y
    }

    pub fn area(&self) -> f64 {
        (self.max.x - self.min.x) * (self.max.y - self.min.y)
    }
}

/// Rejection-samples `diameters.len()` positions uniformly in `region` so
/// that bodies do not overlap (`distance > b_ij`) and keep more than half a
/// diameter from walls and obstacles. Gives up after `10_000·n` attempts.
pub fn spawn_nonoverlapping<R: Rng + ?Sized>(
    region: Rect,
    diameters: &[f64],
    env: &Environment,
    rng: &mut R,
) -> Result<Vec<Vec2>> {
    let n = diameters.len();
    let max_body = diameters.iter().copied().fold(0.0, f64::max);
    let mut index = SpatialIndex::new(max_body.max(1e-3), env.periodic_x);
    let mut placed: Vec<Vec2> = Vec::with_capacity(n);
    let budget = 10_000u64 * n as u64;
    let mut attempts = 0u64;
    while placed.len() < n {
        if attempts >= budget {
            return Err(Error::SpawnInfeasible {
                requested: n,
                achieved: placed.len(),
                attempts,
            });
        }
        attempts += 1;
        let body = diameters[placed.len()];
        let p = Vec2::new(
            rng.random_range(region.min.x..region.max.x),
            rng.random_range(region.min.y..region.max.y),
        );
        if env.clearance(p) <= body / 2.0 {
            continue;
        }
        let mut free = true;
        index.query(p, max_body, |j| {
            if free && env.separation(p, placed[j]) <= (body + diameters[j]) / 2.0 {
                free = false;
            }
        });
        if free {
            index.insert(placed.len(), p);
            placed.push(p);
        }
    }
    Ok(placed)
}

fn wall(ax: f64, ay: f64, bx: f64, by: f64) -> Result<Segment> {
    Segment::new(Vec2::new(ax, ay), Vec2::new(bx, by))
}

/// Periodic corridor with walls along `y = 0` and `y = width`; every agent
/// heads in +x.
pub fn build_corridor(spec: &ScenarioSpec, gait: &GaitParams, params: &ModelParams, seed: u64) -> Result<World> {
    spec.validate()?;
    gait.validate()?;
    let [lx, ly] = spec.dims();
    let env = Environment {
        walls: vec![wall(0.0, 0.0, lx, 0.0)?, wall(0.0, ly, lx, ly)?],
        obstacles: vec![],
        exits: vec![],
        periodic_x: Some((0.0, lx)),
    };
    let n = spec.agent_count();
    let inset = gait.body_diameter / 2.0;
    let region = Rect {
        min: Vec2::new(0.0, inset),
        max: Vec2::new(lx, ly - inset),
    };
    let positions = spawn_nonoverlapping(
        region,
        &vec![gait.body_diameter; n],
        &env,
        &mut rng_stream(seed, SPAWN_TICK, SPAWN_STREAM),
    )?;
    let agents = positions
        .into_iter()
        .enumerate()
        .map(|(i, p)| AgentState::new(i as u32, p, Goal::Bearing(FRAC_PI_2), *gait))
        .collect();
    World::new(agents, env, *params, seed)
}

/// Room enclosed by four walls, the right one split around a centered door
/// which is the only exit. Spawning ignores the door, so the same seed gives
/// the same initial crowd for every door width.
pub fn build_room(spec: &ScenarioSpec, gait: &GaitParams, params: &ModelParams, seed: u64) -> Result<World> {
    spec.validate()?;
    gait.validate()?;
    let [lx, ly] = spec.dims();
    let half = spec.door_width / 2.0;
    let (d_lo, d_hi) = (ly / 2.0 - half, ly / 2.0 + half);
    let door = wall(lx, d_lo, lx, d_hi)?;
    let env = Environment {
        walls: vec![
            wall(0.0, 0.0, lx, 0.0)?,
            wall(lx, 0.0, lx, d_lo)?,
            wall(lx, d_hi, lx, ly)?,
            wall(lx, ly, 0.0, ly)?,
            wall(0.0, ly, 0.0, 0.0)?,
        ],
        obstacles: vec![],
        exits: vec![door],
        periodic_x: None,
    };
    let n = spec.agent_count();
    let inset = gait.body_diameter / 2.0;
    let region = Rect {
        min: Vec2::new(inset, inset),
        max: Vec2::new(lx - inset, ly - inset),
    };
    let positions = spawn_nonoverlapping(
        region,
        &vec![gait.body_diameter; n],
        &env,
        &mut rng_stream(seed, SPAWN_TICK, SPAWN_STREAM),
    )?;
    let agents = positions
        .into_iter()
        .enumerate()
        .map(|(i, p)| AgentState::new(i as u32, p, Goal::Exit(door), *gait))
        .collect();
    World::new(agents, env, *params, seed)
}

pub fn build(spec: &ScenarioSpec, gait: &GaitParams, params: &ModelParams, seed: u64) -> Result<World> {
    match spec.kind {
        ScenarioKind::Corridor => build_corridor(spec, gait, params, seed),
        ScenarioKind::Room => build_room(spec, gait, params, seed),
    }
}

/// The straight move `from→to` passes from one side of `exit` strictly to
/// the other through the opening.
pub fn crosses_exit(from: Vec2, to: Vec2, exit: &Segment) -> bool {
    let dir = exit.b - exit.a;
    let s_from = dir.cross(from - exit.a);
    let s_to = dir.cross(to - exit.a);
    s_from * s_to < 0.0 && segments_intersect(from, to, exit.a, exit.b)
}

/// Wraps positions along the periodic axis and removes agents whose
/// committed move crossed an exit.
pub fn apply_boundaries(world: &mut World, moves: &[MoveRecord]) -> Vec<ExitRecord> {
    let env = &world.env;
    for a in world.agents.iter_mut() {
        a.position = env.wrap(a.position);
    }
    if env.exits.is_empty() {
        return Vec::new();
    }
    let exited: Vec<ExitRecord> = moves
        .iter()
        .filter_map(|m| {
            env.exits
                .iter()
                .position(|e| crosses_exit(m.from, m.to, e))
                .map(|exit| ExitRecord {
                    id: m.id,
                    exit,
                    from: m.from,
                    to: m.to,
                })
        })
        .collect();
    if !exited.is_empty() {
        world
            .agents
            .retain(|a| exited.binary_search_by_key(&a.id, |e| e.id).is_err());
    }
    exited
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::step;

    fn defaults() -> (GaitParams, ModelParams) {
        (GaitParams::default(), ModelParams::default())
    }

    #[test]
    fn corridor_population_and_clearance() {
        let (g, p) = defaults();
        let w = build_corridor(&ScenarioSpec::corridor(1.0), &g, &p, 1).unwrap();
        assert_eq!(w.agents.len(), 100);
        for a in &w.agents {
            assert!(a.position.y > 0.2 && a.position.y < 4.8);
            assert!((0.0..20.0).contains(&a.position.x));
        }
        w.check_invariants().unwrap();
    }

    #[test]
    fn empty_corridor_steps_as_noop() {
        let (g, p) = defaults();
        let mut w = build_corridor(&ScenarioSpec::corridor(0.0), &g, &p, 1).unwrap();
        assert!(w.agents.is_empty());
        let r = step(&mut w).unwrap();
        assert_eq!(w.tick, 1);
        assert!(r.moves.is_empty());
    }

    #[test]
    fn room_walls_split_around_door() {
        let (g, p) = defaults();
        let w = build_room(&ScenarioSpec::room(1.0), &g, &p, 1).unwrap();
        let right: Vec<&Segment> = w
            .env
            .walls
            .iter()
            .filter(|s| s.a.x == 10.0 && s.b.x == 10.0)
            .collect();
        assert_eq!(right.len(), 2);
        for s in right {
            assert!((s.length() - 4.5).abs() < 1e-12);
        }
        assert_eq!(w.env.exits.len(), 1);
        assert!((w.env.exits[0].length() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn room_spawn_independent_of_door() {
        let (g, p) = defaults();
        let a = build_room(&ScenarioSpec::room(1.0), &g, &p, 77).unwrap();
        let b = build_room(&ScenarioSpec::room(2.0), &g, &p, 77).unwrap();
        assert_eq!(a.agents.len(), 300);
        let pa: Vec<Vec2> = a.agents.iter().map(|x| x.position).collect();
        let pb: Vec<Vec2> = b.agents.iter().map(|x| x.position).collect();
        assert_eq!(pa, pb);
    }

    #[test]
    fn room_door_must_fit() {
        let (g, p) = defaults();
        assert!(build_room(&ScenarioSpec::room(10.0), &g, &p, 1).is_err());
        assert!(build_room(&ScenarioSpec::room(0.0), &g, &p, 1).is_err());
    }

    fn brute_min_gap(pts: &[Vec2], env: &Environment) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.min(env.separation(pts[i], pts[j]));
            }
        }
        best
    }

    #[test]
    fn spawn_small_and_full_capacity() {
        let env = Environment::default();
        let region = Rect {
            min: Vec2::new(0.2, 0.2),
            max: Vec2::new(9.8, 9.8),
        };
        let mut rng = rng_stream(3, 0, 0);
        let one = spawn_nonoverlapping(region, &[0.4], &env, &mut rng).unwrap();
        assert!(region.contains(one[0]));
        let two = spawn_nonoverlapping(region, &[0.4, 0.4], &env, &mut rng).unwrap();
        assert!(brute_min_gap(&two, &env) > 0.4);
        let many = spawn_nonoverlapping(region, &vec![0.4; 300], &env, &mut rng).unwrap();
        assert_eq!(many.len(), 300);
        assert!(brute_min_gap(&many, &env) > 0.4);
    }

    #[test]
    fn spawn_reports_achieved_count() {
        let env = Environment::default();
        let region = Rect {
            min: Vec2::new(0.0, 0.0),
            max: Vec2::new(1.0, 1.0),
        };
        let err = spawn_nonoverlapping(region, &vec![0.4; 50], &env, &mut rng_stream(1, 0, 0)).unwrap_err();
        match err {
            Error::SpawnInfeasible {
                requested, achieved, ..
            } => {
                assert_eq!(requested, 50);
                assert!(achieved > 0 && achieved < 50);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn corridor_wraps_and_room_removes() {
        let (g, p) = defaults();
        let mut w = build_corridor(&ScenarioSpec::corridor(0.0), &g, &p, 1).unwrap();
        w.agents.push(AgentState::new(0, Vec2::new(20.3, 2.0), Goal::Bearing(FRAC_PI_2), g));
        let exited = apply_boundaries(&mut w, &[]);
        assert!(exited.is_empty());
        assert!((w.agents[0].position.x - 0.3).abs() < 1e-12);

        let mut room = build_room(&ScenarioSpec { agent_count: Some(0), ..ScenarioSpec::room(1.0) }, &g, &p, 1).unwrap();
        let door = room.env.exits[0];
        let inside = AgentState::new(0, Vec2::new(9.8, 5.0), Goal::Exit(door), g);
        let far = AgentState::new(1, Vec2::new(2.0, 2.0), Goal::Exit(door), g);
        room.agents = vec![inside, far];
        let moves = [
            MoveRecord {
                id: 0,
                from: Vec2::new(9.8, 5.0),
                to: Vec2::new(10.4, 5.0),
                alpha: 1.0,
                phi: 0.0,
                walking: true,
                accepted: true,
                realized_step: 0.6,
            },
            MoveRecord {
                id: 1,
                from: Vec2::new(2.0, 2.0),
                to: Vec2::new(2.0, 2.0),
                alpha: 0.0,
                phi: 0.0,
                walking: true,
                accepted: true,
                realized_step: 0.0,
            },
        ];
        room.agents[0].position = Vec2::new(10.4, 5.0);
        let exited = apply_boundaries(&mut room, &moves);
        assert_eq!(exited.len(), 1);
        assert_eq!(exited[0].id, 0);
        assert_eq!(room.agents.len(), 1);
        assert_eq!(room.agents[0].position, Vec2::new(2.0, 2.0));
    }

    #[test]
    fn crossing_requires_passing_through_the_opening() {
        let door = Segment::new(Vec2::new(10.0, 4.5), Vec2::new(10.0, 5.5)).unwrap();
        assert!(crosses_exit(Vec2::new(9.8, 5.0), Vec2::new(10.3, 5.1), &door));
        assert!(!crosses_exit(Vec2::new(9.8, 7.0), Vec2::new(10.3, 7.0), &door));
        assert!(!crosses_exit(Vec2::new(9.8, 5.0), Vec2::new(10.0, 5.0), &door));
    }
}
