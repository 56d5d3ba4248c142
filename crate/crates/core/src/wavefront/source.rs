//! Ray sources: vertices, critical sources (Steiner fans) and critical segments.
//!
//! Rays are virtual. A ray is a source plus an integer index; its launch parameter (an angle,
//! or an offset along a segment) is `base + index * step`.

use alloc::vec::Vec;

use crate::geom::{Point2, Vec2};
use crate::mesh::WeightedMesh;
use crate::optics::{Entry, RayState};

/// How a point was reached: enough to re-trace it.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Pred {
    /// The global source itself.
    Source,
    /// Straight along the edge from another vertex.
    Edge { from: usize },
    /// Along ray `param` of `source` (launched into `face`) through `hops` crossings, then
    /// straight to `end` (which lies in the ray's last face, usually on the ray).
    Ray { source: usize, param: f64, face: usize, hops: usize, end: Point2 },
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SourceKind {
    Vertex {
        vertex: usize,
    },
    /// Emits Steiner rays into `face`; the launch angle is measured from `normal` toward
    /// `tangent`.
    Critical {
        edge: usize,
        face: usize,
        parent: usize,
        reach: Pred,
        tangent: Vec2,
        normal: Vec2,
    },
    /// Parallel rays leaving the critical segment back into the heavy `face`.
    Segment {
        edge: usize,
        face: usize,
        critical: Option<usize>,
        far_vertex: usize,
        dir: Vec2,
        tangent: Vec2,
        length: f64,
        edge_weight: f64,
        reach: Pred,
    },
}

/// The public, paper-level view of a source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceRef {
    Vertex(usize),
    CriticalSource { point: Point2, parent: usize, node: usize },
    CriticalSegment { edge: usize, entry: Point2, far: Point2 },
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Source {
    pub kind: SourceKind,
    pub origin: Point2,
    /// Distance from the global source to `origin`.
    pub cost: f64,
    /// Vertex whose wavefront (transitively) created this source.
    pub root: usize,
    pub base: f64,
    pub step: f64,
    /// Valid indices are `0..count`; `None` for vertex fans (indices unwrap around the circle).
    pub count: Option<i128>,
}

impl Source {
    pub fn param(&self, index: i128) -> f64 {
        self.base + index as f64 * self.step
    }

    pub fn is_segment(&self) -> bool {
        matches!(self.kind, SourceKind::Segment { .. })
    }

    /// Tree parent (the source whose ray created this one).
    pub fn parent(&self) -> Option<usize> {
        match self.kind {
            SourceKind::Vertex { .. } => None,
            SourceKind::Critical { parent, .. } => Some(parent),
            SourceKind::Segment { critical, .. } => critical,
        }
    }

    pub fn source_ref(&self, id: usize, mesh: &WeightedMesh) -> SourceRef {
        match &self.kind {
            SourceKind::Vertex { vertex } => SourceRef::Vertex(*vertex),
            SourceKind::Critical { parent, .. } => {
                SourceRef::CriticalSource { point: self.origin, parent: *parent, node: id }
            }
            SourceKind::Segment { edge, far_vertex, .. } => SourceRef::CriticalSegment {
                edge: *edge,
                entry: self.origin,
                far: mesh.vertex(*far_vertex),
            },
        }
    }

    /// The ray with launch parameter `param`, positioned at its origin in `face`. For vertex
    /// sources `face` selects the wedge; other sources ignore it.
    pub fn ray(&self, param: f64, face: usize) -> RayState {
        match &self.kind {
            SourceKind::Vertex { vertex } => RayState {
                pos: self.origin,
                dir: Point2::from_angle(param),
                cost: self.cost,
                face,
                entry: Entry::Vertex(*vertex),
            },
            SourceKind::Critical { edge, face, tangent, normal, .. } => RayState {
                pos: self.origin,
                dir: (*tangent * crate::fmath::sin(param) + *normal * crate::fmath::cos(param)).normalized(),
                cost: self.cost,
                face: *face,
                entry: Entry::Edge(*edge),
            },
            SourceKind::Segment { edge, face, dir, tangent, edge_weight, .. } => RayState {
                pos: self.origin + *tangent * param,
                dir: *dir,
                cost: self.cost + edge_weight * param,
                face: *face,
                entry: Entry::Edge(*edge),
            },
        }
    }

    /// Where the ray with `param` starts (a segment ray starts part-way along the edge).
    pub fn start_point(&self, param: f64) -> Point2 {
        match &self.kind {
            SourceKind::Segment { tangent, .. } => self.origin + *tangent * param,
            _ => self.origin,
        }
    }
}

/// Per-root tree of sources, in creation order.
#[derive(Clone, Debug, PartialEq)]
pub struct RayTree {
    pub root: usize,
    /// Source ids, each listed after its parent.
    pub nodes: Vec<usize>,
}

pub fn ray_tree(sources: &[Source], root_source: usize) -> RayTree {
    let root = match sources[root_source].kind {
        SourceKind::Vertex { vertex } => vertex,
        _ => sources[root_source].root,
    };
    let mut nodes = alloc::vec![root_source];
    // sources are created after their parents, so one forward pass suffices
    for (id, s) in sources.iter().enumerate().skip(root_source + 1) {
        if let Some(p) = s.parent() {
            if nodes.contains(&p) && !s.is_segment() {
                nodes.push(id);
            }
        }
    }
    RayTree { root, nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tri() -> WeightedMesh {
        WeightedMesh::new(
            vec![Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(0.0, 2.0)],
            vec![([0, 1, 2], 3.0)],
        )
        .unwrap()
    }

    #[test]
    fn vertex_rays_follow_the_angle() {
        let s = Source {
            kind: SourceKind::Vertex { vertex: 0 },
            origin: Point2::new(0.0, 0.0),
            cost: 1.5,
            root: 0,
            base: 0.0,
            step: 0.25,
            count: None,
        };
        assert_eq!(s.param(3), 0.75);
        let r = s.ray(s.param(2), 0);
        assert!((r.dir.angle() - 0.5).abs() < 1e-15);
        assert_eq!((r.cost, r.entry), (1.5, Entry::Vertex(0)));
        assert_eq!(s.parent(), None);
        assert_eq!(s.source_ref(0, &tri()), SourceRef::Vertex(0));
    }

    #[test]
    fn segment_rays_start_along_the_edge() {
        let m = tri();
        let e = m.edge_between(0, 1).unwrap();
        let s = Source {
            kind: SourceKind::Segment {
                edge: e,
                face: 0,
                critical: Some(4),
                far_vertex: 1,
                dir: Point2::new(0.0, 1.0),
                tangent: Point2::new(1.0, 0.0),
                length: 2.0,
                edge_weight: 3.0,
                reach: Pred::Source,
            },
            origin: Point2::new(0.0, 0.0),
            cost: 2.0,
            root: 0,
            base: 0.1,
            step: 0.5,
            count: Some(4),
        };
        let r = s.ray(s.param(2), 99);
        assert_eq!(r.pos, Point2::new(1.1, 0.0));
        assert!((r.cost - (2.0 + 3.0 * 1.1)).abs() < 1e-12);
        assert_eq!(r.face, 0);
        assert_eq!(s.start_point(1.1), r.pos);
        assert!(s.is_segment());
        assert_eq!(s.parent(), Some(4));
        assert!(matches!(s.source_ref(5, &m), SourceRef::CriticalSegment { far, .. } if far == Point2::new(2.0, 0.0)));
    }
}
