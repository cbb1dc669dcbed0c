use serde::{Deserialize, Serialize};

use crate::geometry::{distance, point_segment_distance, Segment, Vec2};

/// A disk-shaped obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub center: Vec2,
    pub radius: f64,
}

/// Static walkable space: wall segments, disk obstacles, exit openings and
/// an optional periodic x axis.
///
/// A wall containing a door is stored as the residual segments on either
/// side of the gap; the gap itself is listed in `exits`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub walls: Vec<Segment>,
    pub obstacles: Vec<Obstacle>,
    pub exits: Vec<Segment>,
    /// `(x_min, x_max)`; positions are kept in `[x_min, x_max)`.
    pub periodic_x: Option<(f64, f64)>,
}

impl Environment {
    pub fn period(&self) -> Option<f64> {
        self.periodic_x.map(|(lo, hi)| hi - lo)
    }

    /// Shortest representative of a displacement under the periodic axis.
    pub fn min_image(&self, d: Vec2) -> Vec2 {
        match self.period() {
            Some(l) => Vec2::new(d.x - l * (d.x / l).round(), d.y),
            None => d,
        }
    }

    /// Minimum-image distance between two positions.
    pub fn separation(&self, p: Vec2, q: Vec2) -> f64 {
        self.min_image(q - p).norm()
    }

    pub fn wrap(&self, p: Vec2) -> Vec2 {
        match self.periodic_x {
            Some((lo, hi)) => {
                let l = hi - lo;
                let mut x = lo + (p.x - lo).rem_euclid(l);
                // rem_euclid may round up to exactly l
                if x >= hi {
                    x = lo;
                }
                Vec2::new(x, p.y)
            }
            None => p,
        }
    }

    /// Walls together with their periodic images one period to either side.
    pub fn wall_images(&self) -> impl Iterator<Item = Segment> + '_ {
        let offsets: &[f64] = if self.period().is_some() { &[0.0, -1.0, 1.0] } else { &[0.0] };
        let l = self.period().unwrap_or(0.0);
        offsets
            .iter()
            .flat_map(move |&k| self.walls.iter().map(move |w| w.translated(Vec2::new(k * l, 0.0))))
    }

    /// Distance from `p` to the nearest wall or obstacle surface
    /// (infinite in open space).
    pub fn clearance(&self, p: Vec2) -> f64 {
        let walls = self
            .wall_images()
            .map(|w| point_segment_distance(p, w))
            .fold(f64::INFINITY, f64::min);
        let obstacles = self
            .obstacles
            .iter()
            .map(|o| self.separation(p, o.center) - o.radius)
            .fold(f64::INFINITY, f64::min);
        walls.min(obstacles)
    }

    pub fn obstacle_distance(&self, p: Vec2, o: &Obstacle) -> f64 {
        match self.period() {
            Some(_) => self.separation(p, o.center),
            None => distance(p, o.center),
        }
    }
}
