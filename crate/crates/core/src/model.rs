//! Agent state, per-tick stochastic sampling, and candidate kinematics.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bearing, heading_vector, wrap_angle, Segment, Vec2};

/// Rejections before the truncated-normal sampler falls back to clamping.
const MAX_REJECTIONS: usize = 64;

/// Per-agent movement constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaitParams {
    /// Mean desired step length (m).
    pub mu_step: f64,
    /// Standard deviation of the desired step length (m).
    pub sigma_step: f64,
    /// Standard deviation of the desired heading around the goal bearing (rad).
    pub sigma_heading: f64,
    /// Probability of walking (rather than standing) on a given tick.
    pub p_walk: f64,
    /// Body diameter (m).
    pub body_diameter: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        GaitParams {
            mu_step: 0.67,
            sigma_step: 0.067,
            sigma_heading: 0.05,
            p_walk: 1.0,
            body_diameter: 0.4,
        }
    }
}

impl GaitParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.mu_step > 0.0 && self.mu_step.is_finite(), "mu_step must be > 0"),
            (self.sigma_step >= 0.0 && self.sigma_step.is_finite(), "sigma_step must be >= 0"),
            (
                self.sigma_heading >= 0.0 && self.sigma_heading.is_finite(),
                "sigma_heading must be >= 0",
            ),
            ((0.0..=1.0).contains(&self.p_walk), "p_walk must lie in [0, 1]"),
            (
                self.body_diameter > 0.0 && self.body_diameter.is_finite(),
                "body_diameter must be > 0",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::InvalidParameter((*msg).into())),
            None => Ok(()),
        }
    }

    /// Largest step the truncated sampler can produce.
    pub fn max_step(&self) -> f64 {
        self.mu_step + 3.0 * self.sigma_step
    }
}

/// Global movement constants shared by all agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    /// Largest admissible direction shift (rad), strictly below π/2.
    pub phi_tau: f64,
    pub w_alpha: f64,
    pub w_phi: f64,
    /// Number of step-scale values on [0, 1].
    pub n_alpha: usize,
    /// Number of direction-shift values on [−phi_tau, phi_tau]; odd.
    pub n_phi: usize,
    /// Tick duration (s).
    pub dt: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            phi_tau: 75f64.to_radians(),
            w_alpha: 0.5,
            w_phi: 0.5,
            n_alpha: 21,
            n_phi: 21,
            dt: 0.5,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.phi_tau > 0.0 && self.phi_tau < FRAC_PI_2) {
            return err("phi_tau must satisfy 0 < phi_tau < pi/2");
        }
        if !(0.0..=1.0).contains(&self.w_alpha) || !(0.0..=1.0).contains(&self.w_phi) {
            return err("w_alpha and w_phi must lie in [0, 1]");
        }
        if (self.w_alpha + self.w_phi - 1.0).abs() > 1e-9 {
            return err("w_alpha + w_phi must equal 1");
        }
        if self.n_alpha < 2 {
            return err("n_alpha must be >= 2");
        }
        if self.n_phi < 3 || self.n_phi.is_multiple_of(2) {
            return err("n_phi must be odd and >= 3");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return err("dt must be > 0");
        }
        Ok(())
    }

    /// Step-scale grid values, `0` and `1` included exactly.
    pub fn alpha_values(&self) -> Vec<f64> {
        let last = (self.n_alpha - 1) as f64;
        (0..self.n_alpha).map(|i| i as f64 / last).collect()
    }

    /// Direction-shift grid values; exact zero at the center and mirror
    /// symmetric (`phi[k] == -phi[n-1-k]`).
    pub fn phi_values(&self) -> Vec<f64> {
        let last = (self.n_phi - 1) as i64;
        (0..self.n_phi as i64)
            .map(|k| self.phi_tau * (2 * k - last) as f64 / last as f64)
            .collect()
    }
}

/// Where an agent is heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Goal {
    /// A fixed point.
    Point(Vec2),
    /// An exit opening; the agent aims at the nearest point it can pass
    /// through with its body.
    Exit(Segment),
    /// A goal at infinity along a fixed bearing (periodic corridors).
    Bearing(f64),
}

impl Goal {
    /// Mean desired heading from `position`, `None` if the agent is on its goal.
    pub fn bearing_from(&self, position: Vec2, body_diameter: f64) -> Option<f64> {
        match *self {
            Goal::Point(p) => bearing(position, p),
            Goal::Exit(seg) => bearing(position, passable_point(seg, position, body_diameter)),
            Goal::Bearing(b) => Some(wrap_angle(b)),
        }
    }
}

/// Nearest point to `position` on the part of `exit` whose endpoints are
/// inset by half a body diameter; the exit midpoint when the opening is
/// narrower than the body.
pub fn passable_point(exit: Segment, position: Vec2, body_diameter: f64) -> Vec2 {
    let len = exit.length();
    let inset = body_diameter / 2.0;
    if 2.0 * inset >= len {
        return exit.midpoint();
    }
    let dir = (exit.b - exit.a) * (1.0 / len);
    let inner = Segment {
        a: exit.a + dir * inset,
        b: exit.b - dir * inset,
    };
    inner.closest_point(position)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: u32,
    pub position: Vec2,
    pub goal: Goal,
    /// Desired step length for the current tick.
    pub desired_step: f64,
    /// Desired heading (bearing) for the current tick.
    pub desired_heading: f64,
    pub walking: bool,
    pub gait: GaitParams,
}

impl AgentState {
    /// A fresh agent whose heading is initialized toward its goal.
    pub fn new(id: u32, position: Vec2, goal: Goal, gait: GaitParams) -> Self {
        let desired_heading = goal
            .bearing_from(position, gait.body_diameter)
            .unwrap_or(0.0);
        AgentState {
            id,
            position,
            goal,
            desired_step: gait.mu_step,
            desired_heading,
            walking: true,
            gait,
        }
    }

    pub fn walking_factor(&self) -> f64 {
        if self.walking {
            1.0
        } else {
            0.0
        }
    }
}

/// One `(α, φ)` grid point with its world target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub alpha: f64,
    pub phi: f64,
    pub target: Vec2,
}

/// Desired step length from a normal truncated at ±3σ (and at zero).
pub fn sample_desired_step<R: Rng + ?Sized>(gait: &GaitParams, rng: &mut R) -> f64 {
    if gait.sigma_step == 0.0 {
        return gait.mu_step;
    }
    let lo = (gait.mu_step - 3.0 * gait.sigma_step).max(0.0);
    let hi = gait.mu_step + 3.0 * gait.sigma_step;
    let normal = Normal::new(gait.mu_step, gait.sigma_step).expect("validated sigma");
    let mut draw = normal.sample(rng);
    for _ in 0..MAX_REJECTIONS {
        if (lo..=hi).contains(&draw) {
            return draw;
        }
        draw = normal.sample(rng);
    }
    draw.clamp(lo, hi)
}

/// Desired heading: a normal draw around the bearing to the goal, wrapped.
/// An agent sitting exactly on its goal point keeps its previous heading.
pub fn sample_desired_heading<R: Rng + ?Sized>(agent: &AgentState, rng: &mut R) -> f64 {
    let Some(mean) = agent
        .goal
        .bearing_from(agent.position, agent.gait.body_diameter)
    else {
        return agent.desired_heading;
    };
    if agent.gait.sigma_heading == 0.0 {
        return mean;
    }
    let normal = Normal::new(mean, agent.gait.sigma_heading).expect("validated sigma");
    wrap_angle(normal.sample(rng))
}

pub fn sample_walking_state<R: Rng + ?Sized>(p_walk: f64, rng: &mut R) -> bool {
    rng.random_bool(p_walk.clamp(0.0, 1.0))
}

/// `α·l·(sin(θ+φ), cos(θ+φ))·w`.
pub fn displacement(alpha: f64, phi: f64, step: f64, heading: f64, walking: bool) -> Vec2 {
    let w = if walking { 1.0 } else { 0.0 };
    heading_vector(heading + phi) * (alpha * step * w)
}

/// The full `n_alpha × n_phi` candidate set for the agent's current sample,
/// alpha-major.
pub fn candidate_grid(agent: &AgentState, params: &ModelParams) -> Vec<Candidate> {
    let alphas = params.alpha_values();
    let phis = params.phi_values();
    let mut out = Vec::with_capacity(alphas.len() * phis.len());
    for &alpha in &alphas {
        for &phi in &phis {
            out.push(Candidate {
                alpha,
                phi,
                target: agent.position
                    + displacement(
                        alpha,
                        phi,
                        agent.desired_step,
                        agent.desired_heading,
                        agent.walking,
                    ),
            });
        }
    }
    out
}
