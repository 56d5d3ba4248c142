//! Rebuilding polylines from predecessor records by re-tracing rays.

use alloc::vec::Vec;

use crate::geom::Point2;
use crate::mesh::WeightedMesh;
use crate::optics::{cross_edge, face_exit, Entry, RayState};

use super::source::{Pred, Source, SourceKind};

struct Ctx<'a> {
    mesh: &'a WeightedMesh,
    sources: &'a [Source],
    preds: &'a [Option<Pred>],
}

fn push(out: &mut Vec<Point2>, p: Point2) {
    if let Some(&q) = out.last() {
        if q.dist(p) <= 1e-13 * (1.0 + p.x.abs().max(p.y.abs())) {
            return;
        }
    }
    out.push(p);
}

impl Ctx<'_> {
    fn vertex(&self, v: usize, out: &mut Vec<Point2>) {
        let p = self.mesh.vertex(v);
        match self.preds[v] {
            Some(pred) => self.pred(&pred, p, out),
            None => push(out, p),
        }
    }

    fn pred(&self, pred: &Pred, at: Point2, out: &mut Vec<Point2>) {
        match *pred {
            Pred::Source => {}
            Pred::Edge { from } => self.vertex(from, out),
            Pred::Ray { source, param, face, hops, end } => {
                self.ray(source, param, face, hops, out);
                push(out, end);
            }
        }
        push(out, at);
    }

    fn source_start(&self, id: usize, param: f64, out: &mut Vec<Point2>) {
        let s = &self.sources[id];
        match &s.kind {
            SourceKind::Vertex { vertex } => self.vertex(*vertex, out),
            SourceKind::Critical { reach, .. } => self.pred(reach, s.origin, out),
            SourceKind::Segment { reach, .. } => {
                self.pred(reach, s.origin, out);
                push(out, s.start_point(param));
            }
        }
    }

    fn ray(&self, id: usize, param: f64, face: usize, hops: usize, out: &mut Vec<Point2>) {
        self.source_start(id, param, out);
        let mut st = self.sources[id].ray(param, face);
        for _ in 0..hops {
            let ex = face_exit(self.mesh, &st);
            push(out, ex.point);
            let Some(cr) = cross_edge(self.mesh, ex.edge, st.face, st.dir) else { return };
            let Some(th) = cr.refracted_angle() else { return };
            st = RayState {
                pos: ex.point,
                dir: cr.frame.direction(th),
                cost: 0.0,
                face: cr.to_face,
                entry: Entry::Edge(ex.edge),
            };
        }
    }
}

/// Polyline from the global source to vertex `v`.
pub fn vertex_path(mesh: &WeightedMesh, sources: &[Source], preds: &[Option<Pred>], v: usize) -> Vec<Point2> {
    let mut out = Vec::new();
    Ctx { mesh, sources, preds }.vertex(v, &mut out);
    out
}

/// Polyline from the global source to `at`, reached via `pred`.
pub fn pred_path(
    mesh: &WeightedMesh,
    sources: &[Source],
    preds: &[Option<Pred>],
    pred: &Pred,
    at: Point2,
) -> Vec<Point2> {
    let mut out = Vec::new();
    Ctx { mesh, sources, preds }.pred(pred, at, &mut out);
    out
}
