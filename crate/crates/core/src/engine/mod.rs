//! Synchronous tick loop: sample, plan against the tick-t snapshot, commit
//! in a seeded priority order, then apply boundaries.

mod index;
mod log;
mod rng;

pub use index::SpatialIndex;
pub use log::{LogRow, TrajectoryLog};
pub use rng::{rng_stream, Stream, COMMIT_STREAM, SPAWN_STREAM};

use rand::seq::SliceRandom;

use crate::decision::{choose, Decision, RankedGrid};
use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::model::{
    candidate_grid, sample_desired_heading, sample_desired_step, sample_walking_state, AgentState,
    ModelParams,
};
use crate::perception::{feasible_candidates, CollisionSet, Surroundings};
use crate::scenarios::apply_boundaries;

/// Complete simulation state.
#[derive(Debug, Clone)]
pub struct World {
    pub tick: u64,
    /// Sorted by id.
    pub agents: Vec<AgentState>,
    pub env: Environment,
    pub params: ModelParams,
    pub seed: u64,
    ranked: RankedGrid,
}

impl World {
    pub fn new(mut agents: Vec<AgentState>, env: Environment, params: ModelParams, seed: u64) -> Result<Self> {
        params.validate()?;
        agents.sort_by_key(|a| a.id);
        if agents.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(Error::InvalidParameter("duplicate agent id".into()));
        }
        for a in &agents {
            a.gait.validate()?;
        }
        let ranked = RankedGrid::new(&params);
        Ok(World {
            tick: 0,
            agents,
            env,
            params,
            seed,
            ranked,
        })
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.params.dt
    }

    pub fn max_body(&self) -> f64 {
        self.agents
            .iter()
            .map(|a| a.gait.body_diameter)
            .fold(0.0, f64::max)
    }

    /// Smallest `distance − b_ij` over all agent pairs (infinite for fewer
    /// than two agents).
    pub fn min_pair_gap(&self) -> f64 {
        let max_body = self.max_body();
        if self.agents.len() < 2 {
            return f64::INFINITY;
        }
        let index = SpatialIndex::build(self.agents.iter().map(|a| a.position), max_body.max(1e-3), self.env.periodic_x);
        let mut gap = f64::INFINITY;
        for (i, a) in self.agents.iter().enumerate() {
            index.query(a.position, max_body, |j| {
                if j > i {
                    let b = &self.agents[j];
                    let b_sum = (a.gait.body_diameter + b.gait.body_diameter) / 2.0;
                    gap = gap.min(self.env.separation(a.position, b.position) - b_sum);
                }
            });
        }
        // pairs farther apart than max_body cannot set the minimum below 0,
        // but report a finite value even when no pair is close
        if gap.is_infinite() {
            gap = max_body;
        }
        gap
    }

    /// Checks the no-overlap and wall-clearance invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let gap = self.min_pair_gap();
        if gap <= -1e-9 {
            return Err(Error::Validation(format!("agents overlap by {}", -gap)));
        }
        for a in &self.agents {
            let c = self.env.clearance(a.position);
            if c < a.gait.body_diameter / 2.0 - 1e-9 {
                return Err(Error::Validation(format!(
                    "agent {} is {c} m from a wall or obstacle",
                    a.id
                )));
            }
        }
        Ok(())
    }
}

/// One agent's sample and decision for a tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plan {
    pub id: u32,
    pub desired_step: f64,
    pub desired_heading: f64,
    pub walking: bool,
    pub decision: Decision,
}

/// What happened to one agent during commit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveRecord {
    pub id: u32,
    pub from: Vec2,
    /// Committed position before boundary handling.
    pub to: Vec2,
    /// Realized `(α, φ)`; zero when the agent stayed.
    pub alpha: f64,
    pub phi: f64,
    pub walking: bool,
    pub accepted: bool,
    /// Length of the committed displacement (minimum image).
    pub realized_step: f64,
}

/// An agent removed through an exit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitRecord {
    pub id: u32,
    pub exit: usize,
    pub from: Vec2,
    pub to: Vec2,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TickReport {
    /// Tick number after the step.
    pub tick: u64,
    /// In id order, including agents that exited this tick.
    pub moves: Vec<MoveRecord>,
    pub exited: Vec<ExitRecord>,
}

impl TickReport {
    pub fn realized_step(&self, id: u32) -> Option<f64> {
        self.moves
            .binary_search_by_key(&id, |m| m.id)
            .ok()
            .map(|i| self.moves[i].realized_step)
    }
}

/// Draws this tick's step, heading and walking state for one agent.
pub fn sample_agent(agent: &AgentState, seed: u64, tick: u64) -> AgentState {
    let mut rng = rng_stream(seed, tick, agent.id as i64);
    let mut a = agent.clone();
    a.desired_step = sample_desired_step(&agent.gait, &mut rng);
    a.desired_heading = sample_desired_heading(agent, &mut rng);
    a.walking = sample_walking_state(agent.gait.p_walk, &mut rng);
    a
}

/// Decision for one sampled agent by scanning the ranked grid.
pub fn plan_agent(agent: &AgentState, around: &Surroundings<'_>, ranked: &RankedGrid, params: &ModelParams) -> Result<Decision> {
    if !agent.walking {
        return Ok(Decision::stay(agent.position));
    }
    let neighbors = around.nearby_people(agent);
    let set = CollisionSet::new(agent, &neighbors, around.env)?;
    for (alpha, phi) in ranked.iter() {
        let target = agent.position
            + crate::model::displacement(alpha, phi, agent.desired_step, agent.desired_heading, true);
        if alpha == 0.0 || set.admits(target) {
            return Ok(Decision {
                alpha_hat: alpha,
                phi_hat: phi,
                target,
                utility: crate::decision::utility(alpha, phi, params),
            });
        }
    }
    Err(Error::EmptyFeasibleSet)
}

/// Decision for one sampled agent by filtering the full grid, then taking
/// the argmax. Equivalent to [`plan_agent`], and slower.
pub fn plan_agent_exhaustive(agent: &AgentState, around: &Surroundings<'_>, params: &ModelParams) -> Result<Decision> {
    if !agent.walking {
        return Ok(Decision::stay(agent.position));
    }
    let neighbors = around.nearby_people(agent);
    let grid = candidate_grid(agent, params);
    let feasible = feasible_candidates(agent, &grid, &neighbors, around.env)?;
    choose(&feasible, params)
}

fn reach_cell(agents: &[AgentState], max_body: f64) -> f64 {
    let max_step = agents
        .iter()
        .map(|a| a.desired_step)
        .fold(0.0, f64::max);
    (max_step + max_body).max(1e-3)
}

/// Samples and plans every agent against the current snapshot, in id order.
pub fn plan_all(world: &World) -> Result<Vec<Plan>> {
    let sampled: Vec<AgentState> = world
        .agents
        .iter()
        .map(|a| sample_agent(a, world.seed, world.tick))
        .collect();
    let max_body = world.max_body();
    let index = SpatialIndex::build(
        sampled.iter().map(|a| a.position),
        reach_cell(&sampled, max_body),
        world.env.periodic_x,
    );
    let around = Surroundings {
        agents: &sampled,
        index: &index,
        env: &world.env,
        max_body,
    };
    sampled
        .iter()
        .map(|a| {
            Ok(Plan {
                id: a.id,
                desired_step: a.desired_step,
                desired_heading: a.desired_heading,
                walking: a.walking,
                decision: plan_agent(a, &around, &world.ranked, &world.params)?,
            })
        })
        .collect()
}

/// Seeded priority order (slots into `world.agents`) for this tick's commit.
pub fn commit_order(world: &World) -> Vec<usize> {
    let mut order: Vec<usize> = (0..world.agents.len()).collect();
    order.shuffle(&mut rng_stream(world.seed, world.tick, COMMIT_STREAM));
    order
}

/// Applies plans one agent at a time in seeded priority order. A target is
/// accepted only if it keeps more than `b_ij` from every other agent's
/// current slot (committed or not yet committed); otherwise the agent stays.
pub fn commit(world: &mut World, plans: &[Plan]) -> Vec<MoveRecord> {
    assert_eq!(plans.len(), world.agents.len(), "one plan per agent");
    let max_body = world.max_body();
    let env = &world.env;
    let mut positions: Vec<Vec2> = world.agents.iter().map(|a| a.position).collect();
    let mut index = SpatialIndex::build(positions.iter().copied(), max_body.max(1e-3), env.periodic_x);
    let mut accepted = vec![false; plans.len()];

    for k in commit_order(world) {
        let plan = &plans[k];
        let from = positions[k];
        let target = plan.decision.target;
        if target == from {
            continue;
        }
        let body = world.agents[k].gait.body_diameter;
        let mut clear = true;
        index.query(target, max_body, |j| {
            if j != k && clear {
                let b_sum = (body + world.agents[j].gait.body_diameter) / 2.0;
                if env.separation(target, positions[j]) <= b_sum {
                    clear = false;
                }
            }
        });
        if clear {
            index.relocate(k, from, target);
            positions[k] = target;
            accepted[k] = true;
        }
    }

    let mut moves = Vec::with_capacity(plans.len());
    for (k, plan) in plans.iter().enumerate() {
        let agent = &mut world.agents[k];
        let from = agent.position;
        let to = positions[k];
        let wrapped = env.wrap(to);
        let ok = accepted[k];
        moves.push(MoveRecord {
            id: agent.id,
            from,
            to,
            alpha: if ok { plan.decision.alpha_hat } else { 0.0 },
            phi: if ok { plan.decision.phi_hat } else { 0.0 },
            walking: plan.walking,
            accepted: ok,
            realized_step: env.min_image(wrapped - from).norm(),
        });
        agent.position = wrapped;
        agent.desired_step = plan.desired_step;
        agent.desired_heading = plan.desired_heading;
        agent.walking = plan.walking;
    }
    moves
}

/// Advances the world by one tick.
pub fn step(world: &mut World) -> Result<TickReport> {
    let plans = plan_all(world)?;
    let moves = commit(world, &plans);
    let exited = apply_boundaries(world, &moves);
    world.tick += 1;
    Ok(TickReport {
        tick: world.tick,
        moves,
        exited,
    })
}

/// Per-tick callback invoked after each step.
pub trait Observer {
    fn observe(&mut self, world: &World, report: &TickReport) -> Result<(), String>;
}

impl<F> Observer for F
where
    F: FnMut(&World, &TickReport) -> Result<(), String>,
{
    fn observe(&mut self, world: &World, report: &TickReport) -> Result<(), String> {
        self(world, report)
    }
}

/// Steps `ticks` times, calling every observer after each tick, and returns
/// the full trajectory including the initial snapshot.
pub fn run(world: &mut World, ticks: u64, observers: &mut [&mut dyn Observer]) -> Result<TrajectoryLog> {
    let mut log = TrajectoryLog::new(world.params.dt);
    log.record_initial(world);
    for _ in 0..ticks {
        let report = step(world)?;
        log.record(world, &report);
        for obs in observers.iter_mut() {
            obs.observe(world, &report).map_err(|message| Error::Observer {
                tick: world.tick,
                message,
            })?;
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GaitParams, Goal};
    use crate::scenarios::{build_corridor, ScenarioKind, ScenarioSpec};
    use std::f64::consts::FRAC_PI_2;

    fn still_gait() -> GaitParams {
        GaitParams {
            sigma_step: 0.0,
            sigma_heading: 0.0,
            ..GaitParams::default()
        }
    }

    fn open_world(agents: Vec<AgentState>) -> World {
        World::new(agents, Environment::default(), ModelParams::default(), 5).unwrap()
    }

    #[test]
    fn empty_world_only_ticks() {
        let mut w = open_world(vec![]);
        let r = step(&mut w).unwrap();
        assert_eq!(w.tick, 1);
        assert!(r.moves.is_empty() && r.exited.is_empty());
    }

    #[test]
    fn lone_agent_walks_straight() {
        let a = AgentState::new(0, Vec2::new(1.0, 1.0), Goal::Bearing(FRAC_PI_2), still_gait());
        let mut w = open_world(vec![a]);
        let plans = plan_all(&w).unwrap();
        assert_eq!((plans[0].decision.alpha_hat, plans[0].decision.phi_hat), (1.0, 0.0));
        let k = 10;
        for _ in 0..k {
            step(&mut w).unwrap();
        }
        let p = w.agents[0].position;
        assert!((p.x - (1.0 + k as f64 * 0.67)).abs() < 1e-12);
        assert!((p.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standing_agent_stays() {
        let gait = GaitParams {
            p_walk: 0.0,
            ..still_gait()
        };
        let a = AgentState::new(0, Vec2::new(1.0, 1.0), Goal::Bearing(0.0), gait);
        let mut w = open_world(vec![a]);
        let plans = plan_all(&w).unwrap();
        assert_eq!(plans[0].decision.target, Vec2::new(1.0, 1.0));
        step(&mut w).unwrap();
        assert_eq!(w.agents[0].position, Vec2::new(1.0, 1.0));
    }

    #[test]
    fn commit_conflict_first_in_priority_wins() {
        // two agents converging on targets 0.3 m apart
        let a = AgentState::new(0, Vec2::new(0.0, 0.0), Goal::Bearing(FRAC_PI_2), still_gait());
        let b = AgentState::new(1, Vec2::new(1.64, 0.0), Goal::Bearing(-FRAC_PI_2), still_gait());
        let mut w = open_world(vec![a, b]);
        let plans = plan_all(&w).unwrap();
        let ta = plans[0].decision.target;
        let tb = plans[1].decision.target;
        assert!((ta - tb).norm() < 0.4, "{ta:?} {tb:?}");
        let first = commit_order(&w)[0];
        let moves = commit(&mut w, &plans);
        assert!(moves[first].accepted);
        assert!(!moves[1 - first].accepted);
        assert_eq!(w.agents[1 - first].position, moves[1 - first].from);
        assert!(w.min_pair_gap() > 0.0);
    }

    #[test]
    fn conflict_free_plans_commit_verbatim() {
        let a = AgentState::new(0, Vec2::new(0.0, 0.0), Goal::Bearing(0.0), still_gait());
        let b = AgentState::new(1, Vec2::new(5.0, 0.0), Goal::Bearing(0.0), still_gait());
        let mut w = open_world(vec![a, b]);
        let plans = plan_all(&w).unwrap();
        let moves = commit(&mut w, &plans);
        for (m, p) in moves.iter().zip(&plans) {
            assert!(m.accepted);
            assert_eq!(m.to, p.decision.target);
        }
    }

    #[test]
    fn plans_do_not_depend_on_agent_order() {
        let spec = ScenarioSpec {
            kind: ScenarioKind::Corridor,
            target_density: Some(2.0),
            ..ScenarioSpec::default()
        };
        let w = build_corridor(&spec, &GaitParams::default(), &ModelParams::default(), 3).unwrap();
        let reference = plan_all(&w).unwrap();
        let mut reversed = w.clone();
        reversed.agents.reverse();
        // World keeps agents sorted; planning against a reversed snapshot
        // must still give the same per-id decisions
        let sampled: Vec<AgentState> = reversed
            .agents
            .iter()
            .map(|a| sample_agent(a, w.seed, w.tick))
            .collect();
        let index = SpatialIndex::build(sampled.iter().map(|a| a.position), 1.5, w.env.periodic_x);
        let around = Surroundings {
            agents: &sampled,
            index: &index,
            env: &w.env,
            max_body: 0.4,
        };
        for a in &sampled {
            let d = plan_agent(a, &around, &w.ranked, &w.params).unwrap();
            let r = reference.iter().find(|p| p.id == a.id).unwrap();
            assert_eq!(d, r.decision);
        }
    }

    #[test]
    fn ranked_scan_equals_exhaustive_argmax() {
        for density in [1.0, 3.0] {
            let spec = ScenarioSpec {
                kind: ScenarioKind::Corridor,
                target_density: Some(density),
                ..ScenarioSpec::default()
            };
            let mut w = build_corridor(&spec, &GaitParams::default(), &ModelParams::default(), 11).unwrap();
            for _ in 0..5 {
                let sampled: Vec<AgentState> = w.agents.iter().map(|a| sample_agent(a, w.seed, w.tick)).collect();
                let index = SpatialIndex::build(sampled.iter().map(|a| a.position), 1.5, w.env.periodic_x);
                let around = Surroundings {
                    agents: &sampled,
                    index: &index,
                    env: &w.env,
                    max_body: 0.4,
                };
                for a in &sampled {
                    let fast = plan_agent(a, &around, &w.ranked, &w.params).unwrap();
                    let slow = plan_agent_exhaustive(a, &around, &w.params).unwrap();
                    assert_eq!((fast.alpha_hat, fast.phi_hat), (slow.alpha_hat, slow.phi_hat));
                    assert_eq!(fast.target, slow.target);
                }
                step(&mut w).unwrap();
            }
        }
    }

    #[test]
    fn identical_seeds_identical_runs() {
        let spec = ScenarioSpec {
            kind: ScenarioKind::Corridor,
            target_density: Some(2.0),
            ..ScenarioSpec::default()
        };
        let build = || build_corridor(&spec, &GaitParams::default(), &ModelParams::default(), 21).unwrap();
        let (mut a, mut b) = (build(), build());
        for _ in 0..30 {
            step(&mut a).unwrap();
            step(&mut b).unwrap();
            for (x, y) in a.agents.iter().zip(&b.agents) {
                assert_eq!(x.position.x.to_bits(), y.position.x.to_bits());
                assert_eq!(x.position.y.to_bits(), y.position.y.to_bits());
            }
        }
    }

    #[test]
    fn displacement_never_exceeds_sampled_step() {
        let spec = ScenarioSpec {
            kind: ScenarioKind::Corridor,
            target_density: Some(3.0),
            ..ScenarioSpec::default()
        };
        let mut w = build_corridor(&spec, &GaitParams::default(), &ModelParams::default(), 8).unwrap();
        for _ in 0..50 {
            let r = step(&mut w).unwrap();
            for (m, a) in r.moves.iter().zip(&w.agents) {
                assert!(m.realized_step <= a.desired_step + 1e-12);
            }
            w.check_invariants().unwrap();
        }
    }

    #[test]
    fn run_logs_snapshots_and_calls_observers() {
        let spec = ScenarioSpec {
            kind: ScenarioKind::Corridor,
            target_density: Some(0.5),
            ..ScenarioSpec::default()
        };
        let mut w = build_corridor(&spec, &GaitParams::default(), &ModelParams::default(), 2).unwrap();
        let n = w.agents.len();
        let log = run(&mut w.clone(), 0, &mut []).unwrap();
        assert_eq!(log.rows.len(), n);

        let mut calls = 0;
        let mut counter = |_: &World, _: &TickReport| {
            calls += 1;
            Ok(())
        };
        let log = run(&mut w, 4, &mut [&mut counter]).unwrap();
        assert_eq!(calls, 4);
        assert_eq!(log.rows.len(), 5 * n);
    }

    #[test]
    fn observer_failure_aborts() {
        let a = AgentState::new(0, Vec2::ZERO, Goal::Bearing(0.0), still_gait());
        let mut w = open_world(vec![a]);
        let mut failing = |w: &World, _: &TickReport| {
            if w.tick == 3 {
                Err("boom".to_string())
            } else {
                Ok(())
            }
        };
        let err = run(&mut w, 10, &mut [&mut failing]).unwrap_err();
        assert!(matches!(err, Error::Observer { tick: 3, .. }));
    }
}
