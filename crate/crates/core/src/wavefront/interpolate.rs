//! Rays between two sibling strikes on one edge.

use crate::geom::Point2;

/// Where two sibling rays hit an edge: points, incidence angles and costs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrikeView {
    pub q1: Point2,
    pub q2: Point2,
    pub theta1: f64,
    pub theta2: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpRay {
    pub point: Point2,
    pub theta: f64,
    pub dist: f64,
}

/// The ray a fraction `gamma` of the way from the first sibling to the second (linear in
/// point, angle and distance). `None` outside `[0, 1]`.
pub fn interpolate_ray(v: &StrikeView, gamma: f64) -> Option<InterpRay> {
    if !(0.0..=1.0).contains(&gamma) {
        return None;
    }
    Some(InterpRay {
        point: v.q1.lerp(v.q2, gamma),
        theta: v.theta1 + (v.theta2 - v.theta1) * gamma,
        dist: v.d1 + (v.d2 - v.d1) * gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_middle() {
        let v = StrikeView {
            q1: Point2::new(0.0, 0.0),
            q2: Point2::new(2.0, 0.0),
            theta1: 0.1,
            theta2: 0.3,
            d1: 1.0,
            d2: 2.0,
        };
        assert_eq!(interpolate_ray(&v, 0.0).unwrap().point, v.q1);
        assert_eq!(interpolate_ray(&v, 1.0).unwrap().dist, 2.0);
        let m = interpolate_ray(&v, 0.5).unwrap();
        assert_eq!(m.point, Point2::new(1.0, 0.0));
        assert!((m.theta - 0.2).abs() < 1e-15);
        assert!(interpolate_ray(&v, 1.5).is_none());
    }
}
