//! Plane geometry primitives.
//!
//! All angles in this crate are *bearings*: measured from the +y axis toward
//! +x, so that a heading `θ` corresponds to the unit vector `(sin θ, cos θ)`.
//! Standard math-convention angles never leave this module.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or displacement in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A closed line segment. Used for walls and exits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    /// Rejects zero-length and non-finite segments.
    pub fn new(a: Vec2, b: Vec2) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "segment endpoints must be finite: {a:?} -> {b:?}"
            )));
        }
        if a == b {
            return Err(Error::InvalidGeometry(format!(
                "zero-length segment at ({}, {})",
                a.x, a.y
            )));
        }
        Ok(Segment { a, b })
    }

    pub fn length(&self) -> f64 {
        distance(self.a, self.b)
    }

    pub fn midpoint(&self) -> Vec2 {
        (self.a + self.b) * 0.5
    }

    /// Point of the segment closest to `p`.
    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        let ab = self.b - self.a;
        let t = ((p - self.a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
        self.a + ab * t
    }

    pub fn translated(&self, offset: Vec2) -> Segment {
        Segment {
            a: self.a + offset,
            b: self.b + offset,
        }
    }
}

/// Bearing of the vector `(x, y)` via the half-angle form
/// `2·atan(x / (√(x²+y²) + y))`, in `(−π, π]`.
///
/// The formula is `0/0` on the negative y axis; that direction maps to `π`.
/// For `y < 0` the equivalent `2·atan((√(x²+y²) − y) / x)` is used, which
/// avoids cancellation near that axis.
pub fn atan2_paper(x: f64, y: f64) -> Result<f64> {
    if x == 0.0 && y == 0.0 {
        return Err(Error::Domain("bearing of the zero vector".into()));
    }
    let r = x.hypot(y);
    if y >= 0.0 {
        return Ok(2.0 * (x / (r + y)).atan());
    }
    if x == 0.0 {
        return Ok(PI);
    }
    Ok(2.0 * ((r - y) / x).atan())
}

/// Bearing from `from` to `to`, or `None` when the points coincide.
pub fn bearing(from: Vec2, to: Vec2) -> Option<f64> {
    let d = to - from;
    atan2_paper(d.x, d.y).ok()
}

/// Unit vector `(sin θ, cos θ)` for bearing `θ`.
pub fn heading_vector(theta: f64) -> Vec2 {
    let (s, c) = theta.sin_cos();
    Vec2::new(s, c)
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = a.rem_euclid(two_pi);
    if r > PI {
        r -= two_pi;
    }
    // rem_euclid can return exactly two_pi for tiny negative inputs
    if r <= -PI {
        r += two_pi;
    }
    r
}

pub fn distance(p: Vec2, q: Vec2) -> f64 {
    (q - p).norm()
}

pub fn point_segment_distance(p: Vec2, seg: Segment) -> f64 {
    let ab = seg.b - seg.a;
    let ap = p - seg.a;
    let t = ap.dot(ab);
    if t <= 0.0 {
        ap.norm()
    } else if t >= ab.norm_sq() {
        distance(p, seg.b)
    } else {
        // perpendicular distance; exact zero for collinear points
        ab.cross(ap).abs() / ab.norm()
    }
}

fn orientation(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment_collinear(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// True when the closed segments `p1p2` and `q1q2` share at least one point.
pub fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = orientation(q1, q2, p1);
    let d2 = orientation(q1, q2, p2);
    let d3 = orientation(p1, p2, q1);
    let d4 = orientation(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment_collinear(q1, q2, p1))
        || (d2 == 0.0 && on_segment_collinear(q1, q2, p2))
        || (d3 == 0.0 && on_segment_collinear(p1, p2, q1))
        || (d4 == 0.0 && on_segment_collinear(p1, p2, q2))
}

/// Minimum distance between the closed segments `from→to` and `seg`.
/// `from == to` is allowed and degenerates to a point distance.
pub fn segment_segment_distance(from: Vec2, to: Vec2, seg: Segment) -> f64 {
    if from == to {
        return point_segment_distance(from, seg);
    }
    if segments_intersect(from, to, seg.a, seg.b) {
        return 0.0;
    }
    let path = Segment { a: from, b: to };
    point_segment_distance(from, seg)
        .min(point_segment_distance(to, seg))
        .min(point_segment_distance(seg.a, path))
        .min(point_segment_distance(seg.b, path))
}

/// True iff every point of the path `from→to` keeps at least `clearance`
/// from `seg`.
pub fn path_clear(from: Vec2, to: Vec2, seg: Segment, clearance: f64) -> bool {
    segment_segment_distance(from, to, seg) >= clearance
}

/// Minimum distance from `center` to the closed segment `from→to`.
pub fn point_path_distance(center: Vec2, from: Vec2, to: Vec2) -> f64 {
    if from == to {
        return distance(center, from);
    }
    point_segment_distance(center, Segment { a: from, b: to })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    /// Bearing from +y toward +x using the standard two-argument arctangent.
    fn bearing_oracle(x: f64, y: f64) -> f64 {
        x.atan2(y)
    }

    #[test]
    fn atan2_paper_examples() {
        assert!((atan2_paper(1.0, 0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(atan2_paper(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(atan2_paper(0.0, -1.0).unwrap(), PI);
        assert!((atan2_paper(1.0, 1.0).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!((atan2_paper(-1.0, 0.0).unwrap() + FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn atan2_paper_rejects_origin() {
        assert!(matches!(atan2_paper(0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn heading_vector_examples() {
        let v = heading_vector(0.0);
        assert_eq!((v.x, v.y), (0.0, 1.0));
        let v = heading_vector(FRAC_PI_2);
        assert!((v.x - 1.0).abs() < 1e-15 && v.y.abs() < 1e-15);
        let v = heading_vector(PI);
        assert!(v.x.abs() < 1e-15 && (v.y + 1.0).abs() < 1e-15);
    }

    #[test]
    fn wrap_angle_examples() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-1.5 * PI) - FRAC_PI_2).abs() < 1e-12);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Vec2::ZERO, Vec2::new(3.0, 4.0)), 5.0);
        assert_eq!(distance(Vec2::new(1.5, 2.0), Vec2::new(1.5, 2.0)), 0.0);
        assert!((distance(Vec2::ZERO, Vec2::new(1.0, 1.0)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn point_segment_distance_examples() {
        let seg = Segment::new(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(point_segment_distance(Vec2::new(0.0, 1.0), seg), 1.0);
        assert_eq!(point_segment_distance(Vec2::new(2.0, 0.0), seg), 1.0);
        assert_eq!(point_segment_distance(Vec2::new(0.3, 0.0), seg), 0.0);
    }

    #[test]
    fn zero_length_segment_rejected() {
        let p = Vec2::new(1.0, 1.0);
        assert!(Segment::new(p, p).is_err());
    }

    /// Distance between two segments by dense sampling of both.
    fn sampled_segment_distance(p: Vec2, q: Vec2, seg: Segment, n: usize) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..=n {
            let a = p + (q - p) * (i as f64 / n as f64);
            for j in 0..=n {
                let b = seg.a + (seg.b - seg.a) * (j as f64 / n as f64);
                best = best.min(distance(a, b));
            }
        }
        best
    }

    #[test]
    fn path_clear_examples() {
        let from = Vec2::new(0.0, 1.0);
        let to = Vec2::new(2.0, 1.0);
        let stub = Segment::new(Vec2::new(1.0, -1.0), Vec2::new(1.0, 0.9)).unwrap();
        let sampled = sampled_segment_distance(from, to, stub, 2000);
        assert!((sampled - 0.1).abs() < 1e-3);
        assert!((segment_segment_distance(from, to, stub) - 0.1).abs() < 1e-12);
        assert!(!path_clear(from, to, stub, 0.2));

        let floor = Segment::new(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0)).unwrap();
        assert!(path_clear(from, to, floor, 0.5));

        let far = Vec2::new(10.0, 10.0);
        assert!(path_clear(far, far, floor, 0.5));
    }

    #[test]
    fn crossing_paths_have_zero_distance() {
        let wall = Segment::new(Vec2::new(1.0, -1.0), Vec2::new(1.0, 1.0)).unwrap();
        assert_eq!(
            segment_segment_distance(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.3), wall),
            0.0
        );
    }

    fn finite_coord() -> impl Strategy<Value = f64> {
        -100.0..100.0f64
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn atan2_paper_matches_oracle(x in finite_coord(), y in finite_coord()) {
            prop_assume!(x != 0.0 || y != 0.0);
            let got = atan2_paper(x, y).unwrap();
            let want = bearing_oracle(x, y);
            prop_assert!(got > -PI && got <= PI);
            prop_assert!(wrap_angle(got - want).abs() < 1e-12, "{got} vs {want}");
        }

        #[test]
        fn heading_of_bearing_is_parallel(x in finite_coord(), y in finite_coord()) {
            prop_assume!(x.hypot(y) > 1e-9);
            let h = heading_vector(atan2_paper(x, y).unwrap());
            let v = Vec2::new(x, y);
            prop_assert!(h.cross(v).abs() < 1e-9 * v.norm());
            prop_assert!(h.dot(v) > 0.0);
        }
    }

    proptest! {
        #[test]
        fn wrap_angle_range_and_periodicity(a in -50.0..50.0f64, k in -20i32..20) {
            let w = wrap_angle(a);
            prop_assert!(w > -PI && w <= PI);
            let shifted = wrap_angle(a + 2.0 * PI * k as f64);
            prop_assert!(wrap_angle(shifted - w).abs() < 1e-9);
        }

        #[test]
        fn path_clear_is_symmetric(
            fx in -5.0..5.0f64, fy in -5.0..5.0f64,
            tx in -5.0..5.0f64, ty in -5.0..5.0f64,
            ax in -5.0..5.0f64, ay in -5.0..5.0f64,
            bx in -5.0..5.0f64, by in -5.0..5.0f64,
            c in 0.0..2.0f64,
        ) {
            prop_assume!((ax, ay) != (bx, by));
            let seg = Segment::new(Vec2::new(ax, ay), Vec2::new(bx, by)).unwrap();
            let f = Vec2::new(fx, fy);
            let t = Vec2::new(tx, ty);
            prop_assert_eq!(path_clear(f, t, seg, c), path_clear(t, f, seg, c));
        }

        #[test]
        fn segment_distance_matches_sampling(
            fx in -3.0..3.0f64, fy in -3.0..3.0f64,
            tx in -3.0..3.0f64, ty in -3.0..3.0f64,
            ax in -3.0..3.0f64, ay in -3.0..3.0f64,
            bx in -3.0..3.0f64, by in -3.0..3.0f64,
        ) {
            prop_assume!((ax, ay) != (bx, by));
            let seg = Segment::new(Vec2::new(ax, ay), Vec2::new(bx, by)).unwrap();
            let f = Vec2::new(fx, fy);
            let t = Vec2::new(tx, ty);
            let exact = segment_segment_distance(f, t, seg);
            let sampled = sampled_segment_distance(f, t, seg, 200);
            // sampling can only overestimate; spacing ≤ 8.5/200 per segment
            prop_assert!(exact <= sampled + 1e-12);
            prop_assert!(sampled - exact < 0.05);
        }
    }
}
