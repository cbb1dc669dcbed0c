//! The nine acceptance checks behind `crowdstep validate`.
//!
//! Each check builds its own scenarios from the configured model, gait and
//! measurement settings, so a config that breaks the model (for instance a
//! short mean step) makes the speed checks fail.

pub mod oracle;

use std::fmt;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::cli::{bottleneck_run, cmd_sweep_fd, fd_run};
use crate::config::SimConfig;
use crate::decision::{choose, RankedGrid};
use crate::engine::{plan_agent, step};
use crate::error::Result;
use crate::metrics::linear_fit;
use crate::model::{candidate_grid, ModelParams};
use crate::perception::{feasible_candidates, Surroundings};
use crate::scenarios::{build_corridor, ScenarioSpec};

use oracle::{brute_force_choice, grid_index, point_segment, random_instance};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Human-readable measured values.
    pub measured: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: {} ({:.1} s, budget {} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

pub const CHECK_IDS: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

pub const FD_DENSITIES: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 4.0];
pub const BOTTLENECK_WIDTHS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
const REPEATS: usize = 10;
const ORACLE_INSTANCES: usize = 10_000;

fn meta(id: u8) -> (&'static str, u64) {
    match id {
        1 => ("no-overlap", 120),
        2 => ("free-flow speed", 120),
        3 => ("fundamental diagram", 600),
        4 => ("bottleneck flow", 600),
        5 => ("decision oracle", 60),
        6 => ("shadow paths", 60),
        7 => ("determinism", 600),
        8 => ("grid resolution", 240),
        9 => ("conservation", 120),
        _ => ("unknown", 0),
    }
}

/// Runs check `id` (1 to 9).
pub fn run_check(id: u8, config: &SimConfig) -> Result<CheckOutcome> {
    let (name, budget) = meta(id);
    let start = Instant::now();
    let (ok, measured) = match id {
        1 => no_overlap(config)?,
        2 => free_flow(config)?,
        3 => fundamental_diagram(config)?,
        4 => bottleneck(config)?,
        5 => decision_oracle(config)?,
        6 => shadow_paths(config)?,
        7 => determinism(config)?,
        8 => grid_resolution(config)?,
        9 => conservation(config)?,
        _ => return Err(crate::Error::InvalidParameter(format!("no check {id}"))),
    };
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget);
    Ok(CheckOutcome {
        id,
        name,
        passed: ok && elapsed <= budget,
        measured,
        elapsed,
        budget,
    })
}

/// Runs the given checks in order, reporting each as soon as it finishes.
pub fn run_checks(config: &SimConfig, ids: &[u8], mut report: impl FnMut(&CheckOutcome)) -> Result<Vec<CheckOutcome>> {
    if let Some(id) = ids.iter().find(|id| !CHECK_IDS.contains(id)) {
        return Err(crate::Error::InvalidParameter(format!("no check {id}; checks are 1 to 9")));
    }
    ids.iter()
        .map(|&id| {
            let o = run_check(id, config)?;
            report(&o);
            Ok(o)
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean over `REPEATS` runs of the ROI speed at one corridor density.
pub fn mean_fd_speed(config: &SimConfig, density: f64) -> Result<f64> {
    let speeds = (0..REPEATS)
        .map(|r| fd_run(config, density, r).map(|p| p.mean_speed))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(&speeds))
}

fn no_overlap(config: &SimConfig) -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    for s in 0..3 {
        let mut world = build_corridor(
            &ScenarioSpec::corridor(3.0),
            &config.gait,
            &config.model,
            config.seed.wrapping_add(s),
        )?;
        worst = worst.min(world.min_pair_gap());
        for _ in 0..1000 {
            step(&mut world)?;
            worst = worst.min(world.min_pair_gap());
        }
    }
    Ok((worst > -1e-9, format!("min gap {worst:.3e} m over 3 x 1000 ticks")))
}

fn free_flow(config: &SimConfig) -> Result<(bool, String)> {
    let v = mean_fd_speed(config, 0.25)?;
    Ok(((1.27..=1.40).contains(&v), format!("mean speed {v:.4} m/s at 0.25/m2")))
}

fn fundamental_diagram(config: &SimConfig) -> Result<(bool, String)> {
    let speeds = FD_DENSITIES
        .iter()
        .map(|&d| mean_fd_speed(config, d))
        .collect::<Result<Vec<_>>>()?;
    let monotone = speeds.windows(2).all(|w| w[1] <= w[0] + 0.05);
    let drop = speeds[4] < 0.5 * speeds[0];
    let listed: Vec<String> = FD_DENSITIES
        .iter()
        .zip(&speeds)
        .map(|(d, v)| format!("{d}:{v:.3}"))
        .collect();
    Ok((
        monotone && drop,
        format!(
            "speeds {} m/s; non-increasing {monotone}; v(4)/v(0.5) = {:.3}",
            listed.join(" "),
            speeds[4] / speeds[0]
        ),
    ))
}

fn bottleneck(config: &SimConfig) -> Result<(bool, String)> {
    let mut points = Vec::new();
    for &w in &BOTTLENECK_WIDTHS {
        let flows = (0..REPEATS)
            .map(|r| bottleneck_run(config, w, r).map(|e| e.record.max_flow))
            .collect::<Result<Vec<_>>>()?;
        points.push((w, mean(&flows)));
    }
    let increasing = points.windows(2).all(|p| p[1].1 > p[0].1);
    let fit = linear_fit(&points)?;
    let listed: Vec<String> = points.iter().map(|(w, f)| format!("{w}:{f:.3}")).collect();
    Ok((
        increasing && fit.r_squared >= 0.9,
        format!(
            "mean max flow {} p/s; increasing {increasing}; r2 = {:.4}",
            listed.join(" "),
            fit.r_squared
        ),
    ))
}

fn oracle_rng(config: &SimConfig, salt: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(config.seed ^ salt)
}

fn decision_oracle(config: &SimConfig) -> Result<(bool, String)> {
    let params = &config.model;
    let ranked = RankedGrid::new(params);
    let mut rng = oracle_rng(config, 0x5eed_0005);
    let mut mismatches = 0;
    let mut first = None;
    for n in 0..ORACLE_INSTANCES {
        let inst = random_instance(&mut rng, 12);
        let expected = brute_force_choice(&inst, params);
        let (all, index, max_body) = inst.population();
        let around = Surroundings {
            agents: &all,
            index: &index,
            env: &inst.env,
            max_body,
        };
        let agent = &all[0];
        let neighbors = around.nearby_people(agent);
        let grid = candidate_grid(agent, params);
        let chosen = choose(&feasible_candidates(agent, &grid, &neighbors, &inst.env)?, params)?;
        let scanned = plan_agent(agent, &around, &ranked, params)?;
        let a = grid_index(chosen.alpha_hat, chosen.phi_hat, params);
        let b = grid_index(scanned.alpha_hat, scanned.phi_hat, params);
        if a != Some(expected) || b != Some(expected) || chosen.target != scanned.target {
            mismatches += 1;
            first.get_or_insert(n);
        }
    }
    Ok((
        mismatches == 0,
        format!(
            "{mismatches} mismatches in {ORACLE_INSTANCES} instances{}",
            first.map_or(String::new(), |n| format!(" (first at #{n})"))
        ),
    ))
}

fn shadow_paths(config: &SimConfig) -> Result<(bool, String)> {
    let params = &config.model;
    let mut rng = oracle_rng(config, 0x5eed_0006);
    let (mut violations, mut checked) = (0usize, 0usize);
    for _ in 0..ORACLE_INSTANCES {
        let mut inst = random_instance(&mut rng, 3);
        inst.env.walls.clear();
        inst.env.obstacles.clear();
        let (all, index, max_body) = inst.population();
        let around = Surroundings {
            agents: &all,
            index: &index,
            env: &inst.env,
            max_body,
        };
        let agent = &all[0];
        let neighbors = around.nearby_people(agent);
        let grid = candidate_grid(agent, params);
        for c in feasible_candidates(agent, &grid, &neighbors, &inst.env)? {
            if c.alpha == 0.0 {
                continue;
            }
            let from = (agent.position.x, agent.position.y);
            let to = (c.target.x, c.target.y);
            for o in &all[1..] {
                let b = (agent.gait.body_diameter + o.gait.body_diameter) / 2.0;
                let rel = inst.env.min_image(o.position - agent.position);
                let center = (from.0 + rel.x, from.1 + rel.y);
                checked += 1;
                if point_segment(center, from, to) < b - 1e-9 {
                    violations += 1;
                }
            }
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations over {checked} path/disk pairs"),
    ))
}

/// Runs the same small sweep twice into `dir/a` and `dir/b`.
pub fn sweep_twice(config: &SimConfig, dir: &Path) -> Result<(Vec<u8>, Vec<u8>)> {
    let mut runs = Vec::new();
    for sub in ["a", "b"] {
        let c = SimConfig {
            output_dir: dir.join(sub),
            ..config.clone()
        };
        let path = cmd_sweep_fd(&c, &[0.5, 2.0], 2)?;
        runs.push(fs::read(path)?);
    }
    let b = runs.pop().unwrap_or_default();
    let a = runs.pop().unwrap_or_default();
    Ok((a, b))
}

fn determinism(config: &SimConfig) -> Result<(bool, String)> {
    let dir = config.output_dir.join("validate-determinism");
    let (a, b) = sweep_twice(config, &dir)?;
    Ok((
        a == b && !a.is_empty(),
        format!("fd.csv {} and {} bytes, identical {}", a.len(), b.len(), a == b),
    ))
}

/// `n → 2n − 1`: halves the spacing and keeps every original grid point.
pub fn doubled(params: &ModelParams) -> ModelParams {
    ModelParams {
        n_alpha: 2 * params.n_alpha - 1,
        n_phi: 2 * params.n_phi - 1,
        ..*params
    }
}

fn grid_resolution(config: &SimConfig) -> Result<(bool, String)> {
    let coarse = mean_fd_speed(config, 0.25)?;
    let fine_config = SimConfig {
        model: doubled(&config.model),
        ..config.clone()
    };
    let fine = mean_fd_speed(&fine_config, 0.25)?;
    let change = (fine - coarse).abs() / coarse;
    Ok((
        change < 0.02,
        format!(
            "{coarse:.4} m/s ({}x{}) vs {fine:.4} m/s ({}x{}), change {:.2}%",
            config.model.n_alpha,
            config.model.n_phi,
            fine_config.model.n_alpha,
            fine_config.model.n_phi,
            100.0 * change
        ),
    ))
}

fn conservation(config: &SimConfig) -> Result<(bool, String)> {
    let room = bottleneck_run(config, 1.0, 0)?;
    let room_ok = room.crossings == room.initial_agents && room.remaining == 0;

    let mut world = build_corridor(&ScenarioSpec::corridor(2.0), &config.gait, &config.model, config.seed)?;
    let ids: Vec<u32> = world.agents.iter().map(|a| a.id).collect();
    let mut corridor_ok = true;
    for _ in 0..200 {
        let report = step(&mut world)?;
        corridor_ok &= report.exited.is_empty() && world.agents.iter().map(|a| a.id).eq(ids.iter().copied());
    }
    Ok((
        room_ok && corridor_ok,
        format!(
            "room: {} of {} crossed in {} ticks; corridor: {} agents kept {corridor_ok}",
            room.crossings,
            room.initial_agents,
            room.ticks,
            ids.len()
        ),
    ))
}
