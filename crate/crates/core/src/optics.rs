//! Snell refraction, critical angles and single-ray tracing across the mesh.

use alloc::vec::Vec;
use core::fmt;

use crate::fmath;
use crate::geom::{ray_segment, Point2, Vec2};
use crate::mesh::{Location, WeightedMesh};

/// Band around the critical angle treated as exactly critical (radians).
pub const TAU_CRIT: f64 = 1e-9;

/// Default constant in the crossing budget `c · n²`.
pub const CROSSING_FACTOR: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RefractionOutcome {
    Refract(f64),
    CriticalReflect(f64),
    Stop,
}

/// `asin(w_to / w_from)` when going from heavy to light, otherwise none.
pub fn critical_angle(w_from: f64, w_to: f64) -> Option<f64> {
    crate::mesh::critical_angle_raw(w_from, w_to)
}

/// Unsigned refraction. `theta_in` in [0, π/2].
pub fn refract(theta_in: f64, w_in: f64, w_out: f64) -> RefractionOutcome {
    if let Some(tc) = critical_angle(w_in, w_out) {
        if fmath::abs(theta_in - tc) <= TAU_CRIT {
            return RefractionOutcome::CriticalReflect(tc);
        }
        if theta_in > tc {
            return RefractionOutcome::Stop;
        }
    }
    let s = (w_in / w_out) * fmath::sin(theta_in);
    RefractionOutcome::Refract(fmath::asin(s.min(1.0)))
}

/// Tangent (lower to higher vertex index) and unit normal pointing into `into_face`.
#[derive(Clone, Copy, Debug)]
pub struct EdgeFrame {
    pub tangent: Vec2,
    pub normal: Vec2,
}

pub fn edge_frame(mesh: &WeightedMesh, e: usize, into_face: usize) -> EdgeFrame {
    let (a, b) = mesh.edge_points(e);
    let t = (b - a).normalized();
    let mut n = t.perp();
    let c = mesh.vertex(mesh.apex(into_face, e));
    if n.dot(c - a) < 0.0 {
        n = -n;
    }
    EdgeFrame { tangent: t, normal: n }
}

impl EdgeFrame {
    /// Signed angle of `dir` from the normal, positive toward the tangent.
    pub fn angle_of(&self, dir: Vec2) -> f64 {
        fmath::atan2(dir.dot(self.tangent), dir.dot(self.normal))
    }

    pub fn direction(&self, theta: f64) -> Vec2 {
        (self.tangent * fmath::sin(theta) + self.normal * fmath::cos(theta)).normalized()
    }
}

/// Result of pushing a direction across an interior edge.
#[derive(Clone, Copy, Debug)]
pub struct Crossing {
    pub to_face: usize,
    /// Signed incidence in the frame pointing into `to_face`.
    pub incidence: f64,
    pub outcome: RefractionOutcome,
    pub w_in: f64,
    pub w_out: f64,
    pub frame: EdgeFrame,
}

impl Crossing {
    /// Signed outgoing angle when refracting.
    pub fn refracted_angle(&self) -> Option<f64> {
        match self.outcome {
            RefractionOutcome::Refract(t) => Some(if self.incidence < 0.0 { -t } else { t }),
            _ => None,
        }
    }

    pub fn out_dir(&self) -> Option<Vec2> {
        self.refracted_angle().map(|t| self.frame.direction(t))
    }
}

/// None on boundary edges.
pub fn cross_edge(mesh: &WeightedMesh, e: usize, from_face: usize, dir: Vec2) -> Option<Crossing> {
    let to = mesh.edge(e).other_face(from_face)?;
    let frame = edge_frame(mesh, e, to);
    let incidence = frame.angle_of(dir);
    let (w_in, w_out) = (mesh.face_weight(from_face), mesh.face_weight(to));
    let outcome = refract(fmath::abs(incidence).min(core::f64::consts::FRAC_PI_2), w_in, w_out);
    Some(Crossing { to_face: to, incidence, outcome, w_in, w_out, frame })
}

/// How a ray got into its current face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Entry {
    Vertex(usize),
    Edge(usize),
    Interior,
}

/// A ray positioned at its entry into `face`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayState {
    pub pos: Point2,
    pub dir: Vec2,
    pub cost: f64,
    pub face: usize,
    pub entry: Entry,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceExit {
    pub edge: usize,
    pub point: Point2,
    pub length: f64,
    /// Set when the exit point is within τ_geom of an endpoint of `edge`.
    pub vertex: Option<usize>,
}

fn exit_via(mesh: &WeightedMesh, s: &RayState, e: usize) -> FaceExit {
    let (a, b) = mesh.edge_points(e);
    let u = match ray_segment(s.pos, s.dir, a, b) {
        Some((_, u)) => u.clamp(0.0, 1.0),
        // parallel: leave at whichever end the ray heads to
        None => {
            if (b - a).dot(s.dir) > 0.0 {
                1.0
            } else {
                0.0
            }
        }
    };
    let point = a.lerp(b, u);
    let tol = mesh.tol();
    let [va, vb] = mesh.edge(e).vertices;
    let vertex = if point.dist(a) <= tol {
        Some(va)
    } else if point.dist(b) <= tol {
        Some(vb)
    } else {
        None
    };
    let point = match vertex {
        Some(v) => mesh.vertex(v),
        None => point,
    };
    FaceExit { edge: e, point, length: s.pos.dist(point), vertex }
}

/// Signed distance of `c` from the ray's supporting line (positive on the left).
pub fn side_of(s: &RayState, c: Point2) -> f64 {
    s.dir.cross(c - s.pos)
}

/// Where the ray leaves its face.
pub fn face_exit(mesh: &WeightedMesh, s: &RayState) -> FaceExit {
    match s.entry {
        Entry::Vertex(v) => exit_via(mesh, s, mesh.opposite_edge(s.face, v)),
        Entry::Edge(e) => {
            let (p, q) = mesh.edge_ccw(s.face, e);
            let c = mesh.apex(s.face, e);
            let side = side_of(s, mesh.vertex(c));
            // apex on the left: the ray passes right of it, through (q, c)
            let out = if side >= 0.0 {
                mesh.edge_between(q, c).unwrap()
            } else {
                mesh.edge_between(c, p).unwrap()
            };
            let _ = p;
            exit_via(mesh, s, out)
        }
        Entry::Interior => {
            let face = mesh.face(s.face);
            let mut best: Option<(f64, f64, usize)> = None;
            for &e in &face.edges {
                let (a, b) = mesh.edge_points(e);
                if let Some((t, u)) = ray_segment(s.pos, s.dir, a, b) {
                    if t <= 0.0 {
                        continue;
                    }
                    let miss = if u < 0.0 { -u } else if u > 1.0 { u - 1.0 } else { 0.0 };
                    let better = match best {
                        None => true,
                        Some((bm, bt, _)) => miss < bm || (miss == bm && t < bt),
                    };
                    if better {
                        best = Some((miss, t, e));
                    }
                }
            }
            let e = best.map(|b| b.2).unwrap_or(face.edges[0]);
            exit_via(mesh, s, e)
        }
    }
}

/// Classifies a start point relative to its face.
pub fn entry_for(mesh: &WeightedMesh, face: usize, p: Point2) -> Entry {
    let tol = mesh.tol();
    let f = mesh.face(face);
    for &v in &f.vertices {
        if mesh.vertex(v).dist(p) <= tol {
            return Entry::Vertex(v);
        }
    }
    for &e in &f.edges {
        let (a, b) = mesh.edge_points(e);
        if crate::geom::point_segment_dist(p, a, b) <= tol {
            return Entry::Edge(e);
        }
    }
    Entry::Interior
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSegment {
    pub start: Point2,
    pub end: Point2,
    pub face: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceEventKind {
    Refraction,
    CriticalEntry,
    CriticalExit,
    VertexStrike(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEvent {
    pub point: Point2,
    pub edge: usize,
    pub kind: TraceEventKind,
    /// Signed angles from the normal; `refraction` is meaningful for refraction events.
    pub incidence: f64,
    pub refraction: f64,
    pub w_in: f64,
    pub w_out: f64,
}

impl TraceEvent {
    pub fn snell_residual(&self) -> f64 {
        fmath::abs(self.w_in * fmath::sin(self.incidence) - self.w_out * fmath::sin(self.refraction))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Stop,
    CriticalEntry,
    Vertex(usize),
    Boundary,
    Budget,
    Target,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayTrace {
    pub origin: Point2,
    pub origin_face: usize,
    pub segments: Vec<TraceSegment>,
    pub events: Vec<TraceEvent>,
    pub cost: f64,
    pub edge_sequence: Vec<usize>,
    pub termination: Termination,
}

impl RayTrace {
    pub fn budget_exhausted(&self) -> bool {
        self.termination == Termination::Budget
    }

    pub fn end(&self) -> Point2 {
        self.segments.last().map_or(self.origin, |s| s.end)
    }

    /// Origin followed by every segment end.
    pub fn polyline(&self) -> Vec<Point2> {
        let mut v = Vec::with_capacity(self.segments.len() + 1);
        v.push(self.origin);
        v.extend(self.segments.iter().map(|s| s.end));
        v
    }

    pub fn recomputed_cost(&self, mesh: &WeightedMesh) -> f64 {
        self.segments
            .iter()
            .map(|s| s.start.dist(s.end) * mesh.face_weight(s.face))
            .sum()
    }
}

pub fn default_budget(mesh: &WeightedMesh) -> usize {
    let n = mesh.vertices().len();
    CROSSING_FACTOR * n * n
}

/// Traces until something stops the ray, or until it is inside `stop_face` (then the
/// returned state is the entry into that face).
fn trace_impl(
    mesh: &WeightedMesh,
    origin: Point2,
    face: usize,
    dir: Vec2,
    budget: usize,
    stop_face: Option<usize>,
) -> (RayTrace, RayState) {
    let mut st = RayState { pos: origin, dir: dir.normalized(), cost: 0.0, face, entry: entry_for(mesh, face, origin) };
    let mut tr = RayTrace {
        origin,
        origin_face: face,
        segments: Vec::new(),
        events: Vec::new(),
        cost: 0.0,
        edge_sequence: Vec::new(),
        termination: Termination::Budget,
    };
    loop {
        if stop_face == Some(st.face) {
            tr.termination = Termination::Target;
            return (tr, st);
        }
        let ex = face_exit(mesh, &st);
        let w = mesh.face_weight(st.face);
        tr.segments.push(TraceSegment { start: st.pos, end: ex.point, face: st.face });
        tr.cost += ex.length * w;
        st.cost = tr.cost;
        st.pos = ex.point;
        if let Some(v) = ex.vertex {
            tr.events.push(TraceEvent {
                point: ex.point,
                edge: ex.edge,
                kind: TraceEventKind::VertexStrike(v),
                incidence: 0.0,
                refraction: 0.0,
                w_in: w,
                w_out: w,
            });
            tr.termination = Termination::Vertex(v);
            return (tr, st);
        }
        let Some(cr) = cross_edge(mesh, ex.edge, st.face, st.dir) else {
            tr.termination = Termination::Boundary;
            return (tr, st);
        };
        match cr.outcome {
            RefractionOutcome::Refract(_) => {
                let out = cr.refracted_angle().unwrap();
                tr.events.push(TraceEvent {
                    point: ex.point,
                    edge: ex.edge,
                    kind: TraceEventKind::Refraction,
                    incidence: cr.incidence,
                    refraction: out,
                    w_in: cr.w_in,
                    w_out: cr.w_out,
                });
                if tr.edge_sequence.len() >= budget {
                    tr.termination = Termination::Budget;
                    return (tr, st);
                }
                tr.edge_sequence.push(ex.edge);
                st = RayState {
                    pos: ex.point,
                    dir: cr.frame.direction(out),
                    cost: tr.cost,
                    face: cr.to_face,
                    entry: Entry::Edge(ex.edge),
                };
            }
            RefractionOutcome::CriticalReflect(tc) => {
                tr.events.push(TraceEvent {
                    point: ex.point,
                    edge: ex.edge,
                    kind: TraceEventKind::CriticalEntry,
                    incidence: cr.incidence,
                    refraction: if cr.incidence < 0.0 { -core::f64::consts::FRAC_PI_2 } else { core::f64::consts::FRAC_PI_2 },
                    w_in: cr.w_in,
                    w_out: cr.w_out,
                });
                let _ = tc;
                tr.termination = Termination::CriticalEntry;
                return (tr, st);
            }
            RefractionOutcome::Stop => {
                tr.termination = Termination::Stop;
                return (tr, st);
            }
        }
    }
}

/// Traces a geodesic ray from `origin` (lying in `face`) in direction `dir`.
pub fn trace_ray(mesh: &WeightedMesh, origin: Point2, face: usize, dir: Vec2, budget: usize) -> RayTrace {
    trace_impl(mesh, origin, face, dir, budget.max(1), None).0
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathError {
    SegmentCrossesEdge { index: usize },
    OutsideMesh { index: usize },
}

impl fmt::Display for PathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathError::SegmentCrossesEdge { index } => {
                write!(f, "segment {index} crosses an edge interior")
            }
            PathError::OutsideMesh { index } => write!(f, "segment {index} leaves the mesh"),
        }
    }
}

impl core::error::Error for PathError {}

/// Weight of the feature carrying segment ab.
pub fn segment_weight(mesh: &WeightedMesh, a: Point2, b: Point2) -> Option<f64> {
    let tol = mesh.tol();
    for (ei, e) in mesh.edges().iter().enumerate() {
        let (p, q) = mesh.edge_points(ei);
        if crate::geom::point_segment_dist(a, p, q) <= tol && crate::geom::point_segment_dist(b, p, q) <= tol {
            return Some(e.weight);
        }
    }
    let mid = a.lerp(b, 0.5);
    let mut best: Option<(f64, usize)> = None;
    for f in 0..mesh.faces().len() {
        let m = mesh.min_barycentric(f, mid);
        if best.map_or(true, |(bm, _)| m > bm) {
            best = Some((m, f));
        }
    }
    let (_, f) = best?;
    const BARY_TOL: f64 = 1e-9;
    if mesh.min_barycentric(f, a) >= -BARY_TOL && mesh.min_barycentric(f, b) >= -BARY_TOL {
        Some(mesh.face_weight(f))
    } else {
        None
    }
}

/// Σ ‖segment‖ · weight of its face (or edge, for segments along an edge).
pub fn path_cost(mesh: &WeightedMesh, polyline: &[Point2]) -> Result<f64, PathError> {
    let mut total = 0.0;
    for (i, w) in polyline.windows(2).enumerate() {
        let len = w[0].dist(w[1]);
        if len == 0.0 {
            continue;
        }
        match segment_weight(mesh, w[0], w[1]) {
            Some(wt) => total += len * wt,
            None => {
                if mesh.containing_face(w[0]).is_none() || mesh.containing_face(w[1]).is_none() {
                    return Err(PathError::OutsideMesh { index: i });
                }
                return Err(PathError::SegmentCrossesEdge { index: i });
            }
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BendKind {
    /// Crossing an edge interior between two faces.
    Refraction,
    /// Entering or leaving travel along an edge.
    AlongEdge,
    /// Passing through a mesh vertex (no local condition).
    Vertex,
}

/// Local optimality data at an interior point of a path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bend {
    pub index: usize,
    pub point: Point2,
    pub kind: BendKind,
    pub edge: Option<usize>,
    pub vertex: Option<usize>,
    pub w_in: f64,
    pub w_out: f64,
    pub theta_in: f64,
    pub theta_out: f64,
    /// |w_in sin θ_in − w_out sin θ_out|, with along-edge travel counted as θ = π/2 at edge weight.
    pub residual: f64,
}

fn on_edge(mesh: &WeightedMesh, e: usize, a: Point2, b: Point2) -> bool {
    let (p, q) = mesh.edge_points(e);
    let tol = mesh.tol();
    crate::geom::point_segment_dist(a, p, q) <= tol && crate::geom::point_segment_dist(b, p, q) <= tol
}

fn face_of_segment(mesh: &WeightedMesh, a: Point2, b: Point2) -> Option<usize> {
    let mid = a.lerp(b, 0.5);
    (0..mesh.faces().len())
        .map(|f| (mesh.min_barycentric(f, mid), f))
        .max_by(|x, y| x.0.total_cmp(&y.0))
        .map(|x| x.1)
}

/// Classifies every interior point of `polyline` and measures Snell's equality there.
pub fn path_bends(mesh: &WeightedMesh, polyline: &[Point2]) -> Vec<Bend> {
    let mut out = Vec::new();
    for i in 1..polyline.len().saturating_sub(1) {
        let (a, p, b) = (polyline[i - 1], polyline[i], polyline[i + 1]);
        let mut bend = Bend {
            index: i,
            point: p,
            kind: BendKind::Vertex,
            edge: None,
            vertex: None,
            w_in: 0.0,
            w_out: 0.0,
            theta_in: 0.0,
            theta_out: 0.0,
            residual: 0.0,
        };
        let e = match mesh.locate_point(p) {
            Location::Vertex(v) => {
                bend.vertex = Some(v);
                out.push(bend);
                continue;
            }
            Location::Edge(e) => e,
            _ => continue,
        };
        bend.edge = Some(e);
        let (along_in, along_out) = (on_edge(mesh, e, a, p), on_edge(mesh, e, p, b));
        let (fa, fb) = (face_of_segment(mesh, a, p), face_of_segment(mesh, p, b));
        // measure both sides in the frame pointing into the outgoing side
        let into = match (along_out, fb, fa) {
            (false, Some(f), _) if mesh.edge(e).has_face(f) => f,
            (_, _, Some(f)) if mesh.edge(e).has_face(f) => match mesh.edge(e).other_face(f) {
                Some(g) => g,
                None => f,
            },
            _ => continue,
        };
        let frame = edge_frame(mesh, e, into);
        let angle = |d: Vec2| fmath::abs(frame.angle_of(d.normalized()));
        let w_e = mesh.edge(e).weight;
        let (w_in, th_in) = if along_in { (w_e, core::f64::consts::FRAC_PI_2) } else {
            (fa.map_or(w_e, |f| mesh.face_weight(f)), angle(p - a))
        };
        let (w_out, th_out) = if along_out { (w_e, core::f64::consts::FRAC_PI_2) } else {
            (fb.map_or(w_e, |f| mesh.face_weight(f)), angle(b - p))
        };
        if along_in && along_out {
            continue;
        }
        bend.kind = if along_in || along_out { BendKind::AlongEdge } else { BendKind::Refraction };
        bend.w_in = w_in;
        bend.w_out = w_out;
        bend.theta_in = th_in;
        bend.theta_out = th_out;
        bend.residual = fmath::abs(w_in * fmath::sin(th_in) - w_out * fmath::sin(th_out));
        out.push(bend);
    }
    out
}

/// Shooting method: bisects the launch angle until the ray passes through `target`.
pub fn shoot_to_point(
    mesh: &WeightedMesh,
    source: Point2,
    face: usize,
    target: Point2,
    angle_lo: f64,
    angle_hi: f64,
) -> Option<RayTrace> {
    if !(angle_lo < angle_hi) {
        return None;
    }
    let tface = match mesh.locate_point(target) {
        Location::Face(f) => f,
        Location::Edge(e) => {
            // prefer the face the ray arrives in last; try both below
            mesh.edge(e).faces.iter().flatten().copied().next()?
        }
        Location::Vertex(v) => *mesh.vertex_faces(v).first()?,
        Location::Outside => return None,
    };
    let candidates: Vec<usize> = match mesh.locate_point(target) {
        Location::Edge(e) => mesh.edge(e).faces.iter().flatten().copied().collect(),
        Location::Vertex(v) => mesh.vertex_faces(v).to_vec(),
        _ => alloc::vec![tface],
    };
    let budget = default_budget(mesh);
    for tf in candidates {
        if let Some(t) = shoot_into(mesh, source, face, target, tf, angle_lo, angle_hi, budget) {
            return Some(t);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn shoot_into(
    mesh: &WeightedMesh,
    source: Point2,
    face: usize,
    target: Point2,
    tface: usize,
    lo: f64,
    hi: f64,
    budget: usize,
) -> Option<RayTrace> {
    let probe = |a: f64| {
        let (tr, st) = trace_impl(mesh, source, face, Point2::from_angle(a), budget, Some(tface));
        if tr.termination != Termination::Target {
            return None;
        }
        Some((tr, st))
    };
    let (tl, sl) = probe(lo)?;
    let (th, sh) = probe(hi)?;
    if tl.edge_sequence != th.edge_sequence {
        return None;
    }
    let side = |s: &RayState| side_of(s, target);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (side(&sl), side(&sh));
    let tol = mesh.tol();
    let mut best = if fmath::abs(fa) <= fmath::abs(fb) { (tl, sl, fa) } else { (th, sh, fb) };
    if fa * fb > 0.0 && fmath::abs(best.2) > tol {
        return None;
    }
    for _ in 0..200 {
        if fmath::abs(best.2) <= tol || b - a < 1e-14 {
            break;
        }
        let m = 0.5 * (a + b);
        let (tm, sm) = probe(m)?;
        if tm.edge_sequence != tl_seq(&best.0) {
            return None;
        }
        let fm = side(&sm);
        if fmath::abs(fm) < fmath::abs(best.2) {
            best = (tm, sm, fm);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let (mut tr, st, _) = best;
    // the ray must actually reach the target inside the face
    if (target - st.pos).dot(st.dir) < -tol {
        return None;
    }
    let w = mesh.face_weight(st.face);
    tr.segments.push(TraceSegment { start: st.pos, end: target, face: st.face });
    tr.cost += st.pos.dist(target) * w;
    tr.termination = Termination::Target;
    Some(tr)
}

fn tl_seq(t: &RayTrace) -> Vec<usize> {
    t.edge_sequence.clone()
}
