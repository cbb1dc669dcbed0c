//! Commands behind the `crowdstep` binary: single runs and the corridor and
//! bottleneck sweeps. Sweep rows are always emitted in (parameter, run)
//! order, and run `r` uses seed `base_seed + r`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::SimConfig;
use crate::engine::{run, step, Observer, TickReport, World};
use crate::error::{Error, Result};
use crate::metrics::{
    door_crossings, fd_aggregate, flow_rate, roi_sample, write_fd_csv, write_flow_csv, FdPoint,
    FlowRecord, RoiSample,
};
use crate::scenarios::{build, build_corridor, build_room, ScenarioKind, ScenarioSpec};

pub const DEFAULT_DENSITIES: [f64; 9] = [0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
pub const DEFAULT_WIDTHS: [f64; 7] = [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0];
pub const DEFAULT_REPEATS: usize = 10;

fn corridor_spec(config: &SimConfig, density: f64) -> ScenarioSpec {
    ScenarioSpec {
        kind: ScenarioKind::Corridor,
        dimensions: (config.scenario.kind == ScenarioKind::Corridor)
            .then_some(config.scenario.dimensions)
            .flatten(),
        target_density: Some(density),
        agent_count: None,
        ..config.scenario.clone()
    }
}

fn room_spec(config: &SimConfig, width: f64) -> ScenarioSpec {
    let base = &config.scenario;
    ScenarioSpec {
        kind: ScenarioKind::Room,
        dimensions: (base.kind == ScenarioKind::Room).then_some(base.dimensions).flatten(),
        door_width: width,
        target_density: (base.kind == ScenarioKind::Room).then_some(base.target_density).flatten(),
        agent_count: (base.kind == ScenarioKind::Room).then_some(base.agent_count).flatten(),
    }
}

/// Collects one ROI sample per tick.
pub struct RoiRecorder {
    roi: crate::metrics::Roi,
    dt: f64,
    pub samples: Vec<RoiSample>,
}

impl RoiRecorder {
    pub fn new(config: &SimConfig) -> Self {
        RoiRecorder {
            roi: config.measurement.roi(),
            dt: config.model.dt,
            samples: Vec::new(),
        }
    }
}

impl Observer for RoiRecorder {
    fn observe(&mut self, world: &World, report: &TickReport) -> std::result::Result<(), String> {
        let points = world.agents.iter().map(|a| {
            let step = report
                .realized_step(a.id)
                .ok_or_else(|| format!("no move recorded for agent {}", a.id));
            step.map(|s| (a.position, s))
        });
        let points: std::result::Result<Vec<_>, String> = points.collect();
        self.samples.push(roi_sample(points?, &self.roi, self.dt));
        Ok(())
    }
}

/// One corridor run at `density`, reduced to a fundamental-diagram point.
pub fn fd_run(config: &SimConfig, density: f64, run_index: usize) -> Result<FdPoint> {
    let spec = corridor_spec(config, density);
    let seed = config.seed.wrapping_add(run_index as u64);
    let mut world = build_corridor(&spec, &config.gait, &config.model, seed)?;
    let m = &config.measurement;
    let mut recorder = RoiRecorder::new(config);
    for _ in 0..m.warmup_ticks + m.measure_ticks {
        let report = step(&mut world)?;
        recorder
            .observe(&world, &report)
            .map_err(|message| Error::Observer { tick: world.tick, message })?;
    }
    let (mean_density, mean_speed) = fd_aggregate(&recorder.samples, m.warmup_ticks as usize)?;
    Ok(FdPoint {
        target_density: density,
        run: run_index,
        mean_density,
        mean_speed,
    })
}

pub fn sweep_fd(config: &SimConfig, densities: &[f64], repeats: usize) -> Result<Vec<FdPoint>> {
    if densities.is_empty() {
        return Err(Error::InvalidParameter("no densities given".into()));
    }
    let mut sorted = densities.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(sorted.len() * repeats);
    for &d in &sorted {
        for r in 0..repeats {
            rows.push(fd_run(config, d, r)?);
        }
    }
    Ok(rows)
}

/// Result of one room evacuation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvacuationRun {
    pub record: FlowRecord,
    pub initial_agents: usize,
    pub crossings: usize,
    pub remaining: usize,
    pub ticks: u64,
    pub crossings_per_tick: Vec<u32>,
}

/// Runs a room evacuation until it empties or hits the tick cap.
pub fn bottleneck_run(config: &SimConfig, width: f64, run_index: usize) -> Result<EvacuationRun> {
    let spec = room_spec(config, width);
    let seed = config.seed.wrapping_add(run_index as u64);
    let mut world = build_room(&spec, &config.gait, &config.model, seed)?;
    let door = world.env.exits[0];
    let initial_agents = world.agents.len();
    let mut series = Vec::new();
    while !world.agents.is_empty() && world.tick < config.measurement.max_ticks {
        let before = world.agents.clone();
        let report = step(&mut world)?;
        series.push(door_crossings(&before, &report.exited, &door) as u32);
    }
    let flow = flow_rate(&series, config.model.dt, config.measurement.flow_window)?;
    Ok(EvacuationRun {
        record: FlowRecord::new(width, run_index, flow.max_flow),
        initial_agents,
        crossings: series.iter().map(|&c| c as usize).sum(),
        remaining: world.agents.len(),
        ticks: world.tick,
        crossings_per_tick: series,
    })
}

pub fn sweep_bottleneck(config: &SimConfig, widths: &[f64], repeats: usize) -> Result<Vec<FlowRecord>> {
    if widths.is_empty() {
        return Err(Error::InvalidParameter("no widths given".into()));
    }
    let mut sorted = widths.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(sorted.len() * repeats);
    for &w in &sorted {
        for r in 0..repeats {
            rows.push(bottleneck_run(config, w, r)?.record);
        }
    }
    Ok(rows)
}

fn create_in(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// What `cmd_run` wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub trajectory: PathBuf,
    pub metrics: Option<PathBuf>,
    pub ticks: u64,
    pub agents_left: usize,
}

/// Builds the configured scenario, runs `config.ticks` steps and writes
/// `trajectory.csv`; with `metrics` also `fd.csv` (corridor) or `flow.csv`
/// (room) for this single run.
pub fn cmd_run(config: &SimConfig, metrics: bool) -> Result<RunSummary> {
    let mut world = build(&config.scenario, &config.gait, &config.model, config.seed)?;
    let dir = &config.output_dir;
    let trajectory = dir.join("trajectory.csv");
    // fail on an unwritable directory before simulating
    let mut out = create_in(dir, "trajectory.csv")?;

    let mut roi = RoiRecorder::new(config);
    let door = world.env.exits.first().copied();
    let mut crossings: Vec<u32> = Vec::new();
    let mut prev = world.agents.clone();
    let mut door_counter = |w: &World, r: &TickReport| -> std::result::Result<(), String> {
        if let Some(door) = door {
            crossings.push(door_crossings(&prev, &r.exited, &door) as u32);
        }
        prev = w.agents.clone();
        Ok(())
    };
    let log = run(&mut world, config.ticks, &mut [&mut roi, &mut door_counter])?;
    log.write_csv(&mut out)?;
    out.flush()?;

    let metrics_path = if metrics {
        match config.scenario.kind {
            ScenarioKind::Corridor => {
                let (mean_density, mean_speed) =
                    fd_aggregate(&roi.samples, config.measurement.warmup_ticks as usize)?;
                let density = config
                    .scenario
                    .target_density
                    .unwrap_or_else(|| config.scenario.default_density());
                let row = FdPoint {
                    target_density: density,
                    run: 0,
                    mean_density,
                    mean_speed,
                };
                let mut f = create_in(dir, "fd.csv")?;
                write_fd_csv(&[row], &mut f)?;
                f.flush()?;
                Some(dir.join("fd.csv"))
            }
            ScenarioKind::Room => {
                let flow = flow_rate(&crossings, config.model.dt, config.measurement.flow_window)?;
                let row = FlowRecord::new(config.scenario.door_width, 0, flow.max_flow);
                let mut f = create_in(dir, "flow.csv")?;
                write_flow_csv(&[row], &mut f)?;
                f.flush()?;
                Some(dir.join("flow.csv"))
            }
        }
    } else {
        None
    };
    Ok(RunSummary {
        trajectory,
        metrics: metrics_path,
        ticks: world.tick,
        agents_left: world.agents.len(),
    })
}

pub fn cmd_sweep_fd(config: &SimConfig, densities: &[f64], repeats: usize) -> Result<PathBuf> {
    let rows = sweep_fd(config, densities, repeats)?;
    let mut f = create_in(&config.output_dir, "fd.csv")?;
    write_fd_csv(&rows, &mut f)?;
    f.flush()?;
    Ok(config.output_dir.join("fd.csv"))
}

pub fn cmd_sweep_bottleneck(config: &SimConfig, widths: &[f64], repeats: usize) -> Result<PathBuf> {
    let room_side = room_spec(config, 1.0).dims()[1];
    if let Some(w) = widths.iter().find(|&&w| !(w > 0.0 && w < room_side)) {
        return Err(Error::InvalidParameter(format!("door width {w} outside (0, {room_side})")));
    }
    let rows = sweep_bottleneck(config, widths, repeats)?;
    let mut f = create_in(&config.output_dir, "flow.csv")?;
    write_flow_csv(&rows, &mut f)?;
    f.flush()?;
    Ok(config.output_dir.join("flow.csv"))
}
