//! Plane points and the handful of predicates everything else is built on.

use core::ops::{Add, Mul, Neg, Sub};

use crate::fmath;

/// A point (or free vector) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

/// Same representation, used where the value is a direction.
pub type Vec2 = Point2;

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-d cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        fmath::hypot(self.x, self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction. Zero stays zero.
    pub fn normalized(self) -> Point2 {
        let n = self.norm();
        if n > 0.0 {
            Point2::new(self.x / n, self.y / n)
        } else {
            self
        }
    }

    /// Rotated a quarter turn counter-clockwise.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn from_angle(theta: f64) -> Point2 {
        Point2::new(fmath::cos(theta), fmath::sin(theta))
    }

    pub fn angle(self) -> f64 {
        fmath::atan2(self.y, self.x)
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        Point2::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Parameter of the projection of `p` onto segment ab, clamped to [0, 1].
pub fn project_param(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let l2 = d.dot(d);
    if l2 == 0.0 {
        return 0.0;
    }
    ((p - a).dot(d) / l2).clamp(0.0, 1.0)
}

pub fn point_segment_dist(p: Point2, a: Point2, b: Point2) -> f64 {
    p.dist(a.lerp(b, project_param(p, a, b)))
}

fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Euclidean distance between the closed segments ab and cd.
pub fn segment_segment_dist(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    if segments_cross(a, b, c, d) {
        return 0.0;
    }
    point_segment_dist(a, c, d)
        .min(point_segment_dist(b, c, d))
        .min(point_segment_dist(c, a, b))
        .min(point_segment_dist(d, a, b))
}

/// Where the line `p + t*dir` meets segment ab: returns (t, u) with the hit at `a + u*(b-a)`.
/// None when the two are parallel.
pub fn ray_segment(p: Point2, dir: Vec2, a: Point2, b: Point2) -> Option<(f64, f64)> {
    let e = b - a;
    let den = dir.cross(e);
    if den == 0.0 {
        return None;
    }
    let ap = a - p;
    Some((ap.cross(e) / den, ap.cross(dir) / den))
}
