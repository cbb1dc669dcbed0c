//! Brute-force reference for a single agent's decision.
//!
//! Works on raw `(x, y)` pairs with its own distance, cone and clearance
//! arithmetic, enumerates every grid point, and applies the utility and the
//! tie-break cascade directly. Only the grid values and the utility formula
//! are shared with the engine, so that argmax ties compare bit for bit.

use rand::Rng;

use crate::engine::SpatialIndex;
use crate::environment::{Environment, Obstacle};
use crate::geometry::{Segment, Vec2};
use crate::model::{AgentState, GaitParams, Goal, ModelParams};

type P = (f64, f64);

fn sub(a: P, b: P) -> P {
    (a.0 - b.0, a.1 - b.1)
}

fn dot(a: P, b: P) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

fn len(a: P) -> f64 {
    dot(a, a).sqrt()
}

fn orient(a: P, b: P, c: P) -> f64 {
    let (u, v) = (sub(b, a), sub(c, a));
    u.0 * v.1 - u.1 * v.0
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment(p: P, a: P, b: P) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    if l2 == 0.0 {
        return len(sub(p, a));
    }
    let t = (dot(sub(p, a), ab) / l2).clamp(0.0, 1.0);
    len(sub(p, (a.0 + t * ab.0, a.1 + t * ab.1)))
}

fn on_segment(p: P, a: P, b: P) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Distance between closed segments `[a, b]` and `[c, d]`.
pub fn segment_segment(a: P, b: P, c: P, d: P) -> f64 {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    let crosses = o1 * o2 < 0.0 && o3 * o4 < 0.0;
    let touches = (o1 == 0.0 && on_segment(c, a, b))
        || (o2 == 0.0 && on_segment(d, a, b))
        || (o3 == 0.0 && on_segment(a, c, d))
        || (o4 == 0.0 && on_segment(b, c, d));
    if crosses || touches {
        return 0.0;
    }
    point_segment(a, c, d)
        .min(point_segment(b, c, d))
        .min(point_segment(c, a, b))
        .min(point_segment(d, a, b))
}

fn p(v: Vec2) -> P {
    (v.x, v.y)
}

/// One randomized perception problem: a sampled walking agent, the other
/// agents around it, and the static environment.
#[derive(Debug, Clone)]
pub struct Instance {
    pub agent: AgentState,
    pub others: Vec<AgentState>,
    pub env: Environment,
}

impl Instance {
    /// All agents, the focal one first, plus an index over them.
    pub fn population(&self) -> (Vec<AgentState>, SpatialIndex, f64) {
        let mut all = vec![self.agent.clone()];
        all.extend(self.others.iter().cloned());
        let max_body = all.iter().map(|a| a.gait.body_diameter).fold(0.0, f64::max);
        let index = SpatialIndex::build(
            all.iter().map(|a| a.position),
            self.agent.desired_step + max_body,
            self.env.periodic_x,
        );
        (all, index, max_body)
    }
}

const PERIOD: f64 = 6.0;
const HEIGHT: f64 = 5.0;

fn agent_with<R: Rng + ?Sized>(id: u32, position: Vec2, rng: &mut R) -> AgentState {
    let gait = GaitParams {
        body_diameter: rng.random_range(0.3..0.5),
        ..GaitParams::default()
    };
    let mut a = AgentState::new(id, position, Goal::Bearing(0.0), gait);
    a.desired_step = rng.random_range(0.05..1.0);
    a.desired_heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    a.walking = true;
    a
}

/// Draws an instance. About a third are periodic strips with walls along
/// both long sides; the rest are open planes with a few random walls and
/// disk obstacles. No neighbor touches the focal agent and the agent
/// clears every wall and obstacle by half its body.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, max_neighbors: usize) -> Instance {
    let periodic = rng.random_bool(1.0 / 3.0);
    let mut env = Environment::default();
    let position = if periodic {
        env.periodic_x = Some((0.0, PERIOD));
        for y in [0.0, HEIGHT] {
            env.walls
                .push(Segment::new(Vec2::new(0.0, y), Vec2::new(PERIOD, y)).unwrap());
        }
        Vec2::new(rng.random_range(0.0..PERIOD), rng.random_range(0.3..HEIGHT - 0.3))
    } else {
        Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    };
    let mut agent = agent_with(0, position, rng);
    if env.clearance(position) < agent.gait.body_diameter / 2.0 {
        agent.gait.body_diameter = 2.0 * env.clearance(position) - 1e-6;
    }
    let half = agent.gait.body_diameter / 2.0;
    if !periodic {
        for _ in 0..rng.random_range(0..=3) {
            let a = position + Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let b = a + Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            if let Ok(s) = Segment::new(a, b) {
                if point_segment(p(position), p(s.a), p(s.b)) >= half {
                    env.walls.push(s);
                }
            }
        }
        for _ in 0..rng.random_range(0..=2) {
            let o = Obstacle {
                center: position + Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                radius: rng.random_range(0.05..0.6),
            };
            if len(sub(p(o.center), p(position))) >= o.radius + half {
                env.obstacles.push(o);
            }
        }
    }
    let mut others = Vec::new();
    let n = rng.random_range(0..=max_neighbors);
    let mut id = 1;
    let mut attempts = 0;
    while others.len() < n && attempts < 50 * max_neighbors.max(1) {
        attempts += 1;
        let mut other = agent_with(id, Vec2::ZERO, rng);
        let b = (agent.gait.body_diameter + other.gait.body_diameter) / 2.0;
        let dir = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let r = if rng.random_bool(0.1) {
            b * (1.0 + rng.random_range(1e-9..1e-3))
        } else {
            rng.random_range(b..agent.desired_step + b + 0.5)
        };
        other.position = env.wrap(position + Vec2::new(dir.sin(), dir.cos()) * r);
        if env.separation(position, other.position) > b {
            others.push(other);
            id += 1;
        }
    }
    Instance { agent, others, env }
}

/// Grid index `(i, k)` of the decision: `alpha = i/(n_alpha-1)` and
/// `phi = phi_tau·(2k-(n_phi-1))/(n_phi-1)`.
pub type GridIndex = (usize, usize);

fn alpha_at(i: usize, params: &ModelParams) -> f64 {
    i as f64 / (params.n_alpha - 1) as f64
}

fn phi_at(k: usize, params: &ModelParams) -> f64 {
    let last = (params.n_phi - 1) as i64;
    params.phi_tau * (2 * k as i64 - last) as f64 / last as f64
}

/// Position of `(alpha, phi)` on the grid, if it is a grid value.
pub fn grid_index(alpha: f64, phi: f64, params: &ModelParams) -> Option<GridIndex> {
    let i = (0..params.n_alpha).find(|&i| alpha_at(i, params) == alpha)?;
    let k = (0..params.n_phi).find(|&k| phi_at(k, params) == phi)?;
    Some((i, k))
}

fn offsets(env: &Environment) -> Vec<f64> {
    match env.period() {
        Some(l) => vec![-l, 0.0, l],
        None => vec![0.0],
    }
}

fn feasible(inst: &Instance, target: P) -> bool {
    let a = &inst.agent;
    let s = p(a.position);
    let l = a.desired_step;
    let shifts = offsets(&inst.env);
    for o in &inst.others {
        let b = (a.gait.body_diameter + o.gait.body_diameter) / 2.0;
        for dx in &shifts {
            let q = (o.position.x + dx, o.position.y);
            let rel = sub(q, s);
            let d = len(rel);
            if d >= l + b {
                continue;
            }
            let tq = sub(target, q);
            if dot(tq, tq) <= b * b {
                return false;
            }
            let cos_dpsi = if b >= d { 0.0 } else { (1.0 - (b / d) * (b / d)).sqrt() };
            let ts = sub(target, s);
            let r = len(ts);
            if r > d * cos_dpsi && dot(ts, rel) >= r * d * cos_dpsi {
                return false;
            }
        }
    }
    let half = a.gait.body_diameter / 2.0;
    for w in &inst.env.walls {
        for dx in &shifts {
            let (wa, wb) = ((w.a.x + dx, w.a.y), (w.b.x + dx, w.b.y));
            if segment_segment(s, target, wa, wb) < half {
                return false;
            }
        }
    }
    for ob in &inst.env.obstacles {
        for dx in &shifts {
            let c = (ob.center.x + dx, ob.center.y);
            if point_segment(c, s, target) < ob.radius + half {
                return false;
            }
        }
    }
    true
}

fn target_of(inst: &Instance, alpha: f64, phi: f64) -> P {
    let a = &inst.agent;
    let (sin, cos) = (a.desired_heading + phi).sin_cos();
    let m = alpha * a.desired_step;
    (a.position.x + sin * m, a.position.y + cos * m)
}

/// Indices of every admissible grid point.
pub fn feasible_indices(inst: &Instance, params: &ModelParams) -> Vec<GridIndex> {
    let mut out = Vec::new();
    for i in 0..params.n_alpha {
        for k in 0..params.n_phi {
            let alpha = alpha_at(i, params);
            if alpha == 0.0 || feasible(inst, target_of(inst, alpha, phi_at(k, params))) {
                out.push((i, k));
            }
        }
    }
    out
}

/// The decision the rules prescribe, found by exhaustive enumeration.
pub fn brute_force_choice(inst: &Instance, params: &ModelParams) -> GridIndex {
    let mut best: Option<(f64, f64, f64, GridIndex)> = None;
    for (i, k) in feasible_indices(inst, params) {
        let (alpha, phi) = (alpha_at(i, params), phi_at(k, params));
        let u = params.w_alpha * alpha + params.w_phi * (1.0 - phi.abs() / params.phi_tau);
        let better = match best {
            None => true,
            Some((bu, ba, bp, _)) => {
                u > bu
                    || (u == bu
                        && (phi.abs() < bp.abs()
                            || (phi.abs() == bp.abs() && (alpha > ba || (alpha == ba && phi > bp)))))
            }
        };
        if better {
            best = Some((u, alpha, phi, (i, k)));
        }
    }
    best.expect("alpha = 0 is always admissible").3
}
