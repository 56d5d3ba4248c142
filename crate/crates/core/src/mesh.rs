//! The weighted triangulation: validation, adjacency, stats and point location.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fmath;
use crate::geom::{orient, point_segment_dist, Point2};

/// Relative factor for on-vertex / on-edge classification: τ_geom = 1e-9 · l_max.
pub const GEOM_TOL_FACTOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Face {
    /// Counter-clockwise.
    pub vertices: [usize; 3],
    /// `edges[i]` joins `vertices[i]` and `vertices[(i + 1) % 3]`.
    pub edges: [usize; 3],
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Edge {
    /// Lower index first.
    pub vertices: [usize; 2],
    /// `[left, right]` of the directed edge `vertices[0] -> vertices[1]`; `None` on the boundary.
    pub faces: [Option<usize>; 2],
    pub weight: f64,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.faces[0].is_none() || self.faces[1].is_none()
    }

    pub fn other_face(&self, f: usize) -> Option<usize> {
        match self.faces {
            [Some(a), b] if a == f => b,
            [a, Some(b)] if b == f => a,
            _ => None,
        }
    }

    pub fn has_face(&self, f: usize) -> bool {
        self.faces[0] == Some(f) || self.faces[1] == Some(f)
    }

    pub fn has_vertex(&self, v: usize) -> bool {
        self.vertices[0] == v || self.vertices[1] == v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshError {
    Empty,
    NonFiniteCoordinate { vertex: usize },
    VertexOutOfRange { face: usize, index: usize },
    NonPositiveWeight { face: usize },
    DegenerateTriangle { face: usize },
    NonManifoldEdge { a: usize, b: usize },
    Disconnected,
}

impl fmt::Display for MeshError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshError::Empty => write!(f, "mesh has no faces"),
            MeshError::NonFiniteCoordinate { vertex } => {
                write!(f, "vertex {vertex} has a non-finite coordinate")
            }
            MeshError::VertexOutOfRange { face, index } => {
                write!(f, "face {face} references missing vertex {index}")
            }
            MeshError::NonPositiveWeight { face } => {
                write!(f, "face {face} has a non-positive or non-finite weight")
            }
            MeshError::DegenerateTriangle { face } => write!(f, "degenerate triangle (face {face})"),
            MeshError::NonManifoldEdge { a, b } => write!(f, "non-manifold edge ({a}, {b})"),
            MeshError::Disconnected => write!(f, "disconnected mesh"),
        }
    }
}

impl core::error::Error for MeshError {}

/// The lowest-dimensional feature containing a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Vertex(usize),
    Edge(usize),
    Face(usize),
    Outside,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceError {
    pub position: usize,
    pub edge: usize,
}

impl fmt::Display for SequenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "edge {} at position {} does not border the current face",
            self.edge, self.position
        )
    }
}

impl core::error::Error for SequenceError {}

/// Validated triangulation. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightedMesh {
    vertices: Vec<Point2>,
    faces: Vec<Face>,
    edges: Vec<Edge>,
    /// Faces around each vertex, sorted counter-clockwise by their first edge direction.
    vertex_faces: Vec<Vec<usize>>,
    vertex_edges: Vec<Vec<usize>>,
    l_max: f64,
}

impl WeightedMesh {
    /// Builds and validates. Faces given clockwise are flipped. Vertices referenced by no
    /// face are kept (they are simply unreachable).
    pub fn new(vertices: Vec<Point2>, faces: Vec<([usize; 3], f64)>) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        for (i, p) in vertices.iter().enumerate() {
            if !p.is_finite() {
                return Err(MeshError::NonFiniteCoordinate { vertex: i });
            }
        }
        let mut out_faces = Vec::with_capacity(faces.len());
        for (fi, &(idx, w)) in faces.iter().enumerate() {
            for &i in &idx {
                if i >= vertices.len() {
                    return Err(MeshError::VertexOutOfRange { face: fi, index: i });
                }
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(MeshError::NonPositiveWeight { face: fi });
            }
            let [a, b, c] = idx;
            if a == b || b == c || a == c {
                return Err(MeshError::DegenerateTriangle { face: fi });
            }
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            let area2 = orient(pa, pb, pc);
            let longest = pa.dist(pb).max(pb.dist(pc)).max(pc.dist(pa));
            if !(area2.abs() > 1e-12 * longest * longest) {
                return Err(MeshError::DegenerateTriangle { face: fi });
            }
            let vs = if area2 > 0.0 { [a, b, c] } else { [a, c, b] };
            out_faces.push(Face { vertices: vs, edges: [0; 3], weight: w });
        }

        let mut lookup: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        for fi in 0..out_faces.len() {
            for k in 0..3 {
                let a = out_faces[fi].vertices[k];
                let b = out_faces[fi].vertices[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                let ei = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge { vertices: [key.0, key.1], faces: [None, None], weight: 0.0 });
                    edges.len() - 1
                });
                // the face lies left of a -> b
                let slot = if a < b { 0 } else { 1 };
                if edges[ei].faces[slot].is_some() {
                    return Err(MeshError::NonManifoldEdge { a: key.0, b: key.1 });
                }
                edges[ei].faces[slot] = Some(fi);
                out_faces[fi].edges[k] = ei;
            }
        }
        for e in &mut edges {
            e.weight = match e.faces {
                [Some(a), Some(b)] => out_faces[a].weight.min(out_faces[b].weight),
                [Some(a), None] | [None, Some(a)] => out_faces[a].weight,
                [None, None] => unreachable!(),
            };
        }

        // connectivity across shared edges
        let mut seen = vec![false; out_faces.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(f) = stack.pop() {
            for &e in &out_faces[f].edges {
                if let Some(g) = edges[e].other_face(f) {
                    if !seen[g] {
                        seen[g] = true;
                        count += 1;
                        stack.push(g);
                    }
                }
            }
        }
        if count != out_faces.len() {
            return Err(MeshError::Disconnected);
        }

        let mut vertex_faces = vec![Vec::new(); vertices.len()];
        for (fi, f) in out_faces.iter().enumerate() {
            for &v in &f.vertices {
                vertex_faces[v].push(fi);
            }
        }
        for (v, list) in vertex_faces.iter_mut().enumerate() {
            let key = |f: &usize| {
                let face = &out_faces[*f];
                let k = face.vertices.iter().position(|&x| x == v).unwrap();
                let next = vertices[face.vertices[(k + 1) % 3]];
                (next - vertices[v]).angle()
            };
            list.sort_by(|a, b| key(a).total_cmp(&key(b)));
        }
        let mut vertex_edges = vec![Vec::new(); vertices.len()];
        for (ei, e) in edges.iter().enumerate() {
            vertex_edges[e.vertices[0]].push(ei);
            vertex_edges[e.vertices[1]].push(ei);
        }
        let l_max = edges
            .iter()
            .map(|e| vertices[e.vertices[0]].dist(vertices[e.vertices[1]]))
            .fold(0.0, f64::max);

        Ok(WeightedMesh { vertices, faces: out_faces, edges, vertex_faces, vertex_edges, l_max })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn vertex(&self, v: usize) -> Point2 {
        self.vertices[v]
    }
    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }
    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }
    pub fn face_weight(&self, f: usize) -> f64 {
        self.faces[f].weight
    }
    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }
    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }
    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    /// τ_geom.
    pub fn tol(&self) -> f64 {
        GEOM_TOL_FACTOR * self.l_max
    }

    pub fn edge_points(&self, e: usize) -> (Point2, Point2) {
        let [a, b] = self.edges[e].vertices;
        (self.vertices[a], self.vertices[b])
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let (a, b) = self.edge_points(e);
        a.dist(b)
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.vertex_edges
            .get(a)?
            .iter()
            .copied()
            .find(|&e| self.edges[e].has_vertex(b))
    }

    /// Vertex of `f` not on `e`.
    pub fn apex(&self, f: usize, e: usize) -> usize {
        let face = &self.faces[f];
        let k = face.edges.iter().position(|&x| x == e).expect("edge not on face");
        face.vertices[(k + 2) % 3]
    }

    /// Endpoints of `e` in the counter-clockwise order of `f`.
    pub fn edge_ccw(&self, f: usize, e: usize) -> (usize, usize) {
        let face = &self.faces[f];
        let k = face.edges.iter().position(|&x| x == e).expect("edge not on face");
        (face.vertices[k], face.vertices[(k + 1) % 3])
    }

    /// Edge of `f` opposite to its vertex `v`.
    pub fn opposite_edge(&self, f: usize, v: usize) -> usize {
        let face = &self.faces[f];
        let k = face.vertices.iter().position(|&x| x == v).expect("vertex not on face");
        face.edges[(k + 1) % 3]
    }

    pub fn face_points(&self, f: usize) -> [Point2; 3] {
        let [a, b, c] = self.faces[f].vertices;
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn centroid(&self, f: usize) -> Point2 {
        let [a, b, c] = self.face_points(f);
        Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    /// Smallest barycentric coordinate of `p` in `f` (negative outside).
    pub fn min_barycentric(&self, f: usize, p: Point2) -> f64 {
        let [a, b, c] = self.face_points(f);
        let area = orient(a, b, c);
        let l0 = orient(b, c, p) / area;
        let l1 = orient(c, a, p) / area;
        let l2 = orient(a, b, p) / area;
        l0.min(l1).min(l2)
    }

    /// Parameter of `p` along `e` from `vertices[0]`, in [0, 1].
    pub fn edge_param(&self, e: usize, p: Point2) -> f64 {
        let (a, b) = self.edge_points(e);
        crate::geom::project_param(p, a, b)
    }

    pub fn edge_point(&self, e: usize, u: f64) -> Point2 {
        let (a, b) = self.edge_points(e);
        a.lerp(b, u)
    }

    /// Locates `p`, preferring vertices, then edges, then faces, each within τ_geom.
    pub fn locate_point(&self, p: Point2) -> Location {
        let tol = self.tol();
        for (v, q) in self.vertices.iter().enumerate() {
            if !self.vertex_faces[v].is_empty() && q.dist(p) <= tol {
                return Location::Vertex(v);
            }
        }
        for (ei, e) in self.edges.iter().enumerate() {
            let (a, b) = (self.vertices[e.vertices[0]], self.vertices[e.vertices[1]]);
            if point_segment_dist(p, a, b) <= tol {
                return Location::Edge(ei);
            }
        }
        for f in 0..self.faces.len() {
            if self.min_barycentric(f, p) > 0.0 {
                return Location::Face(f);
            }
        }
        Location::Outside
    }

    /// A face whose closure contains `p`, if any.
    pub fn containing_face(&self, p: Point2) -> Option<usize> {
        match self.locate_point(p) {
            Location::Vertex(v) => self.vertex_faces[v].first().copied(),
            Location::Edge(e) => self.edges[e].faces.iter().flatten().next().copied(),
            Location::Face(f) => Some(f),
            Location::Outside => None,
        }
    }

    /// Face sequence visited when crossing `edges` in order from `start`.
    pub fn edge_sequence_faces(&self, start: usize, edges: &[usize]) -> Result<Vec<usize>, SequenceError> {
        let mut out = Vec::with_capacity(edges.len() + 1);
        out.push(start);
        let mut f = start;
        for (i, &e) in edges.iter().enumerate() {
            let next = self
                .edges
                .get(e)
                .filter(|edge| edge.has_face(f))
                .and_then(|edge| edge.other_face(f))
                .ok_or(SequenceError { position: i, edge: e })?;
            out.push(next);
            f = next;
        }
        Ok(out)
    }
}

/// Aggregate quantities the discretization depends on.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeshStats {
    pub n: usize,
    pub l_min: f64,
    pub l_max: f64,
    pub w_min: f64,
    pub w_max: f64,
    pub mu: f64,
    pub theta_cm: f64,
    /// Smallest interior face angle. Informational only.
    pub theta_min: f64,
    /// Largest absolute coordinate. Informational only.
    pub max_coord: f64,
}

pub fn critical_angle_raw(w_from: f64, w_to: f64) -> Option<f64> {
    if w_from > w_to {
        Some(fmath::asin(w_to / w_from))
    } else {
        None
    }
}

pub fn compute_stats(mesh: &WeightedMesh) -> MeshStats {
    let mut l_min = f64::INFINITY;
    let mut theta_cm: f64 = 0.0;
    for (ei, e) in mesh.edges.iter().enumerate() {
        l_min = l_min.min(mesh.edge_length(ei));
        if let [Some(a), Some(b)] = e.faces {
            let (wa, wb) = (mesh.faces[a].weight, mesh.faces[b].weight);
            if let Some(t) = critical_angle_raw(wa.max(wb), wa.min(wb)) {
                theta_cm = theta_cm.max(t);
            }
        }
    }
    let w_min = mesh.faces.iter().map(|f| f.weight).fold(f64::INFINITY, f64::min);
    let w_max = mesh.faces.iter().map(|f| f.weight).fold(0.0, f64::max);
    let mut theta_min = f64::INFINITY;
    for f in 0..mesh.faces.len() {
        let p = mesh.face_points(f);
        for k in 0..3 {
            let u = p[(k + 1) % 3] - p[k];
            let v = p[(k + 2) % 3] - p[k];
            theta_min = theta_min.min(fmath::atan2(u.cross(v).abs(), u.dot(v)));
        }
    }
    let max_coord = mesh
        .vertices
        .iter()
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(0.0, f64::max);
    MeshStats {
        n: mesh.vertices.len(),
        l_min,
        l_max: mesh.l_max,
        w_min,
        w_max,
        mu: w_max / w_min,
        theta_cm,
        theta_min,
        max_coord,
    }
}
