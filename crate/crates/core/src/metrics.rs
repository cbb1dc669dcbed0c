//! Measurement procedures: region-of-interest density/speed sampling for the
//! fundamental diagram, and door-crossing flow for the bottleneck.

use std::io::{self, Write};

use crate::engine::ExitRecord;
use crate::error::{Error, Result};
use crate::geometry::{Segment, Vec2};
use crate::model::AgentState;
use crate::scenarios::crosses_exit;

/// Square measurement region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Roi {
    pub center: Vec2,
    /// Half of the side length.
    pub half_side: f64,
}

impl Default for Roi {
    fn default() -> Self {
        Roi {
            center: Vec2::new(10.0, 2.5),
            half_side: 1.0,
        }
    }
}

impl Roi {
    pub fn area(&self) -> f64 {
        (2.0 * self.half_side).powi(2)
    }

    /// Half-open on the upper edges so tiled regions never double count.
    pub fn contains(&self, p: Vec2) -> bool {
        let d = p - self.center;
        d.x >= -self.half_side && d.x < self.half_side && d.y >= -self.half_side && d.y < self.half_side
    }
}

/// One tick's reading inside the region of interest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiSample {
    pub density: f64,
    /// Mean speed of agents inside; `None` when the region is empty.
    pub speed: Option<f64>,
}

/// Density (count / area) and mean speed (realized step / dt) of the agents
/// whose centers lie inside `roi`. Input pairs are `(position, realized step)`.
pub fn roi_sample(agents: impl IntoIterator<Item = (Vec2, f64)>, roi: &Roi, dt: f64) -> RoiSample {
    let mut count = 0usize;
    let mut speed_sum = 0.0;
    for (p, realized) in agents {
        if roi.contains(p) {
            count += 1;
            speed_sum += realized / dt;
        }
    }
    RoiSample {
        density: count as f64 / roi.area(),
        speed: (count > 0).then(|| speed_sum / count as f64),
    }
}

/// Time-averaged `(density, speed)` after discarding `warmup` samples.
/// Ticks with an empty region do not enter the speed mean.
pub fn fd_aggregate(samples: &[RoiSample], warmup: usize) -> Result<(f64, f64)> {
    let kept = samples.get(warmup..).unwrap_or(&[]);
    if kept.is_empty() {
        return Err(Error::Metric(format!(
            "no samples left after discarding {warmup} of {}",
            samples.len()
        )));
    }
    let density = kept.iter().map(|s| s.density).sum::<f64>() / kept.len() as f64;
    let speeds: Vec<f64> = kept.iter().filter_map(|s| s.speed).collect();
    if speeds.is_empty() {
        return Err(Error::Metric("region of interest empty on every sampled tick".into()));
    }
    Ok((density, speeds.iter().sum::<f64>() / speeds.len() as f64))
}

/// One row of `fd.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdPoint {
    pub target_density: f64,
    pub run: usize,
    pub mean_density: f64,
    pub mean_speed: f64,
}

/// Agents that left through `door` this tick. Each exited agent is checked
/// against its previous-tick position, so an agent is counted at most once.
pub fn door_crossings(prev: &[AgentState], exited: &[ExitRecord], door: &Segment) -> usize {
    exited
        .iter()
        .filter(|e| {
            prev.binary_search_by_key(&e.id, |a| a.id)
                .is_ok_and(|i| crosses_exit(prev[i].position, e.to, door))
        })
        .count()
}

/// Sliding-window flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSeries {
    pub max_flow: f64,
    /// Flow (persons/s) of each full window, by window start tick.
    pub windows: Vec<f64>,
}

/// Crossings per `window` seconds, over every full window of the series.
pub fn flow_rate(crossings_per_tick: &[u32], dt: f64, window: f64) -> Result<FlowSeries> {
    let width = (window / dt).round();
    if width < 1.0 || (width * dt - window).abs() > 1e-9 * window.max(1.0) {
        return Err(Error::Metric(format!("window {window} s is not a multiple of dt {dt} s")));
    }
    let width = width as usize;
    if crossings_per_tick.len() < width {
        return Err(Error::Metric(format!(
            "run of {} ticks is shorter than the {width}-tick window",
            crossings_per_tick.len()
        )));
    }
    let mut sum: u64 = crossings_per_tick[..width].iter().map(|&c| u64::from(c)).sum();
    let mut windows = Vec::with_capacity(crossings_per_tick.len() - width + 1);
    windows.push(sum as f64 / window);
    for i in width..crossings_per_tick.len() {
        sum += u64::from(crossings_per_tick[i]);
        sum -= u64::from(crossings_per_tick[i - width]);
        windows.push(sum as f64 / window);
    }
    let max_flow = windows.iter().copied().fold(0.0, f64::max);
    Ok(FlowSeries { max_flow, windows })
}

/// One row of `flow.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowRecord {
    pub door_width: f64,
    pub run: usize,
    pub max_flow: f64,
    pub specific_flow: f64,
}

impl FlowRecord {
    pub fn new(door_width: f64, run: usize, max_flow: f64) -> Self {
        FlowRecord {
            door_width,
            run,
            max_flow,
            specific_flow: max_flow / door_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` on `x`. An exact fit (including constant
/// data) reports `r_squared = 1`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::Metric("linear fit needs at least 3 distinct x values".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Metric("x values have no variance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 || ss_res <= 1e-24 * ss_tot.max(1.0) {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

pub const FD_HEADER: &str = "target_density,run,mean_density,mean_speed";
pub const FLOW_HEADER: &str = "door_width,run,max_flow,specific_flow";

pub fn write_fd_csv<W: Write>(rows: &[FdPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "{FD_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.target_density, r.run, r.mean_density, r.mean_speed)?;
    }
    Ok(())
}

pub fn write_flow_csv<W: Write>(rows: &[FlowRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{FLOW_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.door_width, r.run, r.max_flow, r.specific_flow)?;
    }
    Ok(())
}
