//! The event loop: vertex fans, bundle extension, splits, critical incidence, elimination.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{FRAC_PI_2, TAU};
use core::fmt;

use crate::fmath;
use crate::geom::{orient, point_segment_dist, Point2};
use crate::mesh::WeightedMesh;
use crate::optics::{critical_angle, cross_edge, edge_frame, face_exit, side_of, Entry, FaceExit, RayState, TAU_CRIT};

use super::bundle::{
    global_index, next_pos, pos_at, resolve, search, sub_spans, Bundle, Footprint, Pos, Span, Status,
};
use super::params::DiscretizationParams;
use super::source::{Pred, Source, SourceKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    /// Popped events before giving up.
    pub event_budget: usize,
    /// Constant `c` in the per-bundle crossing budget `c · n²`.
    pub crossing_factor: usize,
    /// Sample bundle divergence after every extension (slow).
    pub check_invariants: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { event_budget: 2_000_000, crossing_factor: crate::optics::CROSSING_FACTOR, check_invariants: false }
    }
}

/// Counters gathered while running; also the structural-invariant report.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub events: usize,
    pub sibling_strikes: usize,
    pub vertex_strikes: usize,
    pub late_vertex_strikes: usize,
    pub bundles: usize,
    pub splits: usize,
    pub eliminated: usize,
    pub terminated: usize,
    pub crossing_budget_hits: usize,
    pub critical_sources: usize,
    pub critical_segments: usize,
    /// Transition straddled two sources; no critical source created.
    pub critical_fallbacks: usize,
    /// Critical incidence from a critical-segment ray (ruled out for shortest paths).
    pub critical_rejected: usize,
    /// No neighbouring refracted ray to bound the Steiner fan.
    pub steiner_fallbacks: usize,
    pub segment_interpolations: usize,
    pub segment_search_fallbacks: usize,
    pub heap_violations: usize,
    pub divergence_checks: usize,
    pub divergence_violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunError {
    NoSuchVertex(usize),
    SameVertex,
    Unreachable { target: usize, diagnostics: Diagnostics },
    EventBudget { diagnostics: Diagnostics },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::NoSuchVertex(v) => write!(f, "no vertex {v}"),
            RunError::SameVertex => write!(f, "source and target coincide"),
            RunError::Unreachable { target, .. } => write!(f, "target {target} unreachable"),
            RunError::EventBudget { diagnostics } => {
                write!(f, "event budget exceeded after {} events", diagnostics.events)
            }
        }
    }
}

impl core::error::Error for RunError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    SiblingStrike,
    VertexStrike,
}

/// One popped event, as handed to an [`Observer`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventRecord {
    pub seq: u64,
    pub key: f64,
    pub kind: EventKind,
    pub bundle: Option<usize>,
    pub vertex: Option<usize>,
    pub edge: Option<usize>,
    pub points: [Option<Point2>; 2],
}

pub trait Observer {
    fn event(&mut self, rec: &EventRecord);
}

/// Observer that drops everything.
pub struct Silent;

impl Observer for Silent {
    fn event(&mut self, _: &EventRecord) {}
}

#[derive(Clone, Copy, Debug)]
enum Ev {
    Sibling { bundle: usize, edge: usize },
    Vertex { vertex: usize, cost: f64, pred: Pred, arrival: Option<usize> },
}

#[derive(Clone, Copy, Debug)]
struct Event {
    key: f64,
    seq: u64,
    ev: Ev,
}

impl PartialEq for Event {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Event {
    // min-heap on (key, seq)
    fn cmp(&self, o: &Self) -> Ordering {
        o.key.total_cmp(&self.key).then(o.seq.cmp(&self.seq))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    Exit(usize),
    Hit(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Crit {
    Refract,
    Critical,
    Beyond,
}

/// Interval of an edge covered by a bundle on entering a face.
#[derive(Clone, Copy, Debug)]
struct Cover {
    root: usize,
    u0: f64,
    u1: f64,
    c0: f64,
    c1: f64,
}

impl Cover {
    fn new(root: usize, (ua, ca): (f64, f64), (ub, cb): (f64, f64)) -> Cover {
        if ua <= ub {
            Cover { root, u0: ua, u1: ub, c0: ca, c1: cb }
        } else {
            Cover { root, u0: ub, u1: ua, c0: cb, c1: ca }
        }
    }

    fn cost_at(&self, u: f64) -> f64 {
        let w = self.u1 - self.u0;
        if w <= 0.0 {
            return self.c0.min(self.c1);
        }
        let t = ((u - self.u0) / w).clamp(0.0, 1.0);
        self.c0 + (self.c1 - self.c0) * t
    }
}

/// A bundle as it entered `face` across `edge`; re-traceable later.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Snapshot {
    pub edge: usize,
    pub face: usize,
    pub root: usize,
    pub spans: Vec<Span>,
    pub faces: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Ray found exactly at a critical transition.
#[derive(Clone, Copy, Debug)]
struct CritRay {
    source: usize,
    param: f64,
    face0: usize,
    hops: usize,
    point: Point2,
    cost: f64,
    incidence: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CriticalError {
    /// A critical-segment ray cannot be critically incident on a shortest path.
    FromSegment,
}

impl fmt::Display for CriticalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "critical incidence from a critical-segment ray")
    }
}

pub struct Engine<'m> {
    mesh: &'m WeightedMesh,
    params: DiscretizationParams,
    opts: RunOptions,
    pub(crate) sources: Vec<Source>,
    pub(crate) bundles: Vec<Bundle>,
    heap: BinaryHeap<Event>,
    seq: u64,
    cur_key: f64,
    tentative: Vec<f64>,
    pub(crate) dist: Vec<Option<f64>>,
    pub(crate) pred: Vec<Option<Pred>>,
    cover: BTreeMap<(usize, usize), Vec<Cover>>,
    pub(crate) snapshots: Vec<Snapshot>,
    record_snapshots: bool,
    pub(crate) diag: Diagnostics,
    crossing_budget: usize,
    fan_step: f64,
}

/// Outcome of one popped event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Step {
    Idle,
    Settled(usize),
    Empty,
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

impl<'m> Engine<'m> {
    pub fn new(mesh: &'m WeightedMesh, params: &DiscretizationParams, opts: &RunOptions) -> Self {
        let n = mesh.vertices().len();
        // spacing that divides the full turn, no wider than delta
        let count = fmath::ceil(TAU / params.delta);
        Engine {
            mesh,
            params: *params,
            opts: *opts,
            sources: Vec::new(),
            bundles: Vec::new(),
            heap: BinaryHeap::new(),
            seq: 0,
            cur_key: 0.0,
            tentative: vec![f64::INFINITY; n],
            dist: vec![None; n],
            pred: vec![None; n],
            cover: BTreeMap::new(),
            snapshots: Vec::new(),
            record_snapshots: false,
            diag: Diagnostics::default(),
            crossing_budget: opts.crossing_factor.max(1) * n * n,
            fan_step: TAU / count,
        }
    }

    pub fn record_snapshots(&mut self, on: bool) {
        self.record_snapshots = on;
    }

    pub fn mesh(&self) -> &WeightedMesh {
        self.mesh
    }
    pub fn sources(&self) -> &[Source] {
        &self.sources
    }
    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }
    pub fn diagnostics(&self) -> Diagnostics {
        self.diag
    }
    pub fn distance(&self, v: usize) -> Option<f64> {
        self.dist[v]
    }
    pub fn distances(&self) -> &[Option<f64>] {
        &self.dist
    }
    pub fn predecessors(&self) -> &[Option<Pred>] {
        &self.pred
    }
    pub fn fan_step(&self) -> f64 {
        self.fan_step
    }
    pub fn params(&self) -> &DiscretizationParams {
        &self.params
    }

    fn push(&mut self, key: f64, ev: Ev) {
        self.seq += 1;
        self.heap.push(Event { key, seq: self.seq, ev });
    }

    fn offer_vertex(&mut self, v: usize, cost: f64, pred: Pred, arrival: Option<usize>) {
        if self.dist[v].is_some() || !(cost < self.tentative[v]) {
            return;
        }
        self.tentative[v] = cost;
        self.push(cost.max(self.cur_key), Ev::Vertex { vertex: v, cost, pred, arrival });
    }

    /// Settles the global source and launches its wavefront.
    pub fn start(&mut self, s: usize) {
        self.dist[s] = Some(0.0);
        self.pred[s] = Some(Pred::Source);
        self.init_vertex_wavefront(s, None, 0.0);
    }

    /// Pops and handles one event.
    pub fn step(&mut self, obs: &mut dyn Observer) -> Step {
        let Some(e) = self.heap.pop() else {
            return Step::Empty;
        };
        self.diag.events += 1;
        if e.key < self.cur_key {
            self.diag.heap_violations += 1;
        }
        self.cur_key = self.cur_key.max(e.key);
        match e.ev {
            Ev::Sibling { bundle, edge } => {
                let b = &self.bundles[bundle];
                obs.event(&EventRecord {
                    seq: e.seq,
                    key: e.key,
                    kind: EventKind::SiblingStrike,
                    bundle: Some(bundle),
                    vertex: None,
                    edge: Some(edge),
                    points: [Some(b.first.pos), Some(b.last.pos)],
                });
                self.diag.sibling_strikes += 1;
                self.extend_bundle(bundle, edge);
                Step::Idle
            }
            Ev::Vertex { vertex, cost, pred, arrival } => {
                obs.event(&EventRecord {
                    seq: e.seq,
                    key: e.key,
                    kind: EventKind::VertexStrike,
                    bundle: None,
                    vertex: Some(vertex),
                    edge: None,
                    points: [Some(self.mesh.vertex(vertex)), None],
                });
                self.diag.vertex_strikes += 1;
                if self.dist[vertex].is_some() {
                    self.diag.late_vertex_strikes += 1;
                    return Step::Idle;
                }
                self.dist[vertex] = Some(cost);
                self.pred[vertex] = Some(pred);
                self.init_vertex_wavefront(vertex, arrival, cost);
                Step::Settled(vertex)
            }
        }
    }

    fn add_source(&mut self, s: Source) -> usize {
        self.sources.push(s);
        self.sources.len() - 1
    }

    fn add_bundle(&mut self, b: Bundle) -> usize {
        self.bundles.push(b);
        self.diag.bundles += 1;
        self.bundles.len() - 1
    }

    /// Rays of `v` into every incident face except `arrival`, one bundle per face.
    pub fn init_vertex_wavefront(&mut self, v: usize, arrival: Option<usize>, d: f64) {
        let mesh = self.mesh;
        let pv = mesh.vertex(v);
        let src = self.add_source(Source {
            kind: SourceKind::Vertex { vertex: v },
            origin: pv,
            cost: d,
            root: v,
            base: 0.0,
            step: self.fan_step,
            count: None,
        });
        let step = self.fan_step;
        for &f in mesh.vertex_faces(v) {
            if Some(f) == arrival {
                continue;
            }
            let face = mesh.face(f);
            let k = face.vertices.iter().position(|&x| x == v).unwrap();
            let (a, b) = (face.vertices[(k + 1) % 3], face.vertices[(k + 2) % 3]);
            let (da, db) = (mesh.vertex(a) - pv, mesh.vertex(b) - pv);
            let mut a0 = da.angle();
            if a0 < 0.0 {
                a0 += TAU;
            }
            let wedge = fmath::atan2(da.cross(db), da.dot(db));
            // keep the extreme rays clear of a and b
            let margin = (8.0 * mesh.tol() / da.norm().min(db.norm())).max(1e-12);
            let k_lo = fmath::ceil((a0 + margin) / step) as i128;
            let k_hi = fmath::floor((a0 + wedge - margin) / step) as i128;
            if k_lo > k_hi {
                continue;
            }
            let s = &self.sources[src];
            let first = s.ray(s.param(k_lo), f);
            let last = s.ray(s.param(k_hi), f);
            let bid = self.add_bundle(Bundle {
                spans: vec![Span { source: src, lo: k_lo, hi: k_hi, start: 0 }],
                faces: vec![f],
                edges: Vec::new(),
                first,
                last,
                status: Status::Active,
                key: d,
                root: v,
            });
            // far-edge endpoints: reach the edge on the extreme ray, then walk along it
            let far = mesh.opposite_edge(f, v);
            let w_far = mesh.edge(far).weight;
            let wf = mesh.face_weight(f);
            for (st, k, target) in [(first, k_lo, a), (last, k_hi, b)] {
                let ex = face_exit(mesh, &st);
                let c = d + ex.length * wf + w_far * ex.point.dist(mesh.vertex(target));
                let pred = Pred::Ray { source: src, param: self.sources[src].param(k), face: f, hops: 0, end: ex.point };
                self.offer_vertex(target, c, pred, Some(f));
            }
            self.place(bid);
        }
        for &e in mesh.vertex_edges(v) {
            let [x, y] = mesh.edge(e).vertices;
            let u = if x == v { y } else { x };
            let c = d + mesh.edge(e).weight * mesh.edge_length(e);
            self.offer_vertex(u, c, Pred::Edge { from: v }, None);
            self.edge_segment(v, e, u, d);
        }
    }

    /// Paths may run from `v` along an edge at the lighter weight and leave critically into
    /// the heavier face; no fan ray covers those, so the edge gets its own critical segment.
    fn edge_segment(&mut self, v: usize, e: usize, u: usize, d: f64) {
        let mesh = self.mesh;
        let [Some(f1), Some(f2)] = mesh.edge(e).faces else { return };
        let (w1, w2) = (mesh.face_weight(f1), mesh.face_weight(f2));
        if w1 == w2 {
            return;
        }
        let (heavy, light) = if w1 > w2 { (f1, f2) } else { (f2, f1) };
        let len = mesh.edge_length(e);
        let sigma = self.params.sigma;
        // skip the vertex itself (fan rays start there) and stop short of u
        if len - 2.0 * sigma <= 0.0 {
            return;
        }
        let ks = (fmath::ceil((len - 2.0 * sigma) / sigma) as i128).max(1);
        let tc = critical_angle(mesh.face_weight(heavy), mesh.face_weight(light)).unwrap();
        let tangent = (mesh.vertex(u) - mesh.vertex(v)).normalized();
        let normal = edge_frame(mesh, e, light).normal;
        let dir = (tangent * fmath::sin(tc) - normal * fmath::cos(tc)).normalized();
        let src = self.add_source(Source {
            kind: SourceKind::Segment {
                edge: e,
                face: heavy,
                critical: None,
                far_vertex: u,
                dir,
                tangent,
                length: len,
                edge_weight: mesh.edge(e).weight,
                reach: Pred::Edge { from: v },
            },
            origin: mesh.vertex(v),
            cost: d,
            root: v,
            base: sigma,
            step: (len - 2.0 * sigma) / ks as f64,
            count: Some(ks + 1),
        });
        self.diag.critical_segments += 1;
        self.launch_segment(src, e, heavy, ks, v);
    }

    fn launch_segment(&mut self, src: usize, edge: usize, face: usize, ks: i128, root: usize) {
        let s = &self.sources[src];
        let first = s.ray(s.param(0), face);
        let last = s.ray(s.param(ks), face);
        let spans = vec![Span { source: src, lo: 0, hi: ks, start: 0 }];
        if self.record_snapshots {
            self.snapshots.push(Snapshot {
                edge,
                face,
                root,
                spans: spans.clone(),
                faces: vec![face],
                edges: Vec::new(),
            });
        }
        let bid = self.add_bundle(Bundle {
            spans,
            faces: vec![face],
            edges: Vec::new(),
            first,
            last,
            status: Status::Active,
            key: self.cur_key,
            root,
        });
        self.place(bid);
    }

    fn class_of(&self, st: &RayState) -> (Class, FaceExit) {
        let mesh = self.mesh;
        let ex = face_exit(mesh, st);
        if let Entry::Edge(e) = st.entry {
            let c = mesh.apex(st.face, e);
            if fmath::abs(side_of(st, mesh.vertex(c))) <= mesh.tol() {
                return (Class::Hit(c), ex);
            }
        }
        match ex.vertex {
            Some(v) => (Class::Hit(v), ex),
            None => (Class::Exit(ex.edge), ex),
        }
    }

    fn param_of(&self, b: &Bundle, p: Pos) -> f64 {
        let s = b.spans[p.span];
        self.sources[s.source].param(s.at(p.k))
    }

    /// State of the ray at `p` on entering the bundle's current face.
    fn state_at(&self, b: &Bundle, p: Pos) -> Option<RayState> {
        if p == b.first_pos() {
            return Some(b.first);
        }
        if p == b.last_pos() {
            return Some(b.last);
        }
        self.state_param(b, p.span, self.param_of(b, p))
    }

    fn state_param(&self, b: &Bundle, span: usize, param: f64) -> Option<RayState> {
        let s = b.spans[span];
        resolve(self.mesh, &self.sources[s.source], param, &b.faces, &b.edges, s.start, None)
    }

    fn class_at(&self, b: &Bundle, p: Pos) -> Option<Class> {
        self.state_at(b, p).map(|st| self.class_of(&st).0)
    }

    fn hops(b: &Bundle, span: usize) -> usize {
        b.faces.len() - 1 - b.spans[span].start
    }

    fn ray_pred(&self, b: &Bundle, span: usize, param: f64, end: Point2) -> Pred {
        let s = b.spans[span];
        Pred::Ray { source: s.source, param, face: b.faces[s.start], hops: Self::hops(b, span), end }
    }

    /// Weighted lower bound on reaching segment pq from any ray of the bundle.
    fn lower_bound(&self, b: &Bundle, p: Point2, q: Point2) -> f64 {
        let mut best = f64::INFINITY;
        for s in &b.spans {
            let src = &self.sources[s.source];
            let mut w = b.faces[s.start..]
                .iter()
                .map(|&f| self.mesh.face_weight(f))
                .fold(f64::INFINITY, f64::min);
            if let SourceKind::Segment { edge_weight, .. } = src.kind {
                w = w.min(edge_weight);
            }
            best = best.min(src.cost + w * point_segment_dist(src.origin, p, q));
        }
        best
    }

    /// Classifies the siblings in the current face; schedules the next strike or splits.
    fn place(&mut self, bid: usize) {
        let b = &self.bundles[bid];
        let (c1, x1) = self.class_of(&b.first);
        let (c2, x2) = self.class_of(&b.last);
        match (c1, c2) {
            (Class::Exit(e1), Class::Exit(e2)) if e1 == e2 => {
                let lb = self.lower_bound(b, x1.point, x2.point);
                let key = b.key.max(lb);
                self.push(key, Ev::Sibling { bundle: bid, edge: e1 });
            }
            _ => self.split(bid, c1, c2),
        }
    }

    fn split(&mut self, bid: usize, c1: Class, c2: Class) {
        let mesh = self.mesh;
        self.diag.splits += 1;
        let b = self.bundles[bid].clone();
        self.bundles[bid].status = Status::Split;
        let f = b.face();
        let wf = mesh.face_weight(f);
        let apex = match b.first.entry {
            Entry::Edge(e) => Some(mesh.apex(f, e)),
            _ => None,
        };
        let segment = b.spans.len() == 1 && self.sources[b.spans[0].source].is_segment();

        // vertex the split happens at
        let c = apex.or(match (c1, c2) {
            (Class::Hit(v), _) | (_, Class::Hit(v)) => Some(v),
            _ => None,
        });

        let mut guess: Option<(Pos, Pos, f64)> = None;
        if segment {
            if let (Some(cv), Class::Exit(_), Class::Exit(_)) = (c, c1, c2) {
                guess = self.segment_guess(&b, cv, c1, c2);
            }
        }

        let (r1, r2) = match guess {
            Some((a, z, _)) => (Some(a), Some(z)),
            None => {
                let r1 = match c1 {
                    Class::Exit(_) => Some(search(&b.spans, |p| p == b.first_pos() || self.class_at(&b, p) == Some(c1)).0),
                    _ => None,
                };
                let r2 = match c2 {
                    Class::Exit(_) => Some(search(&b.spans, |p| p != b.last_pos() && self.class_at(&b, p) != Some(c2)).1),
                    _ => None,
                };
                (r1, r2)
            }
        };
        let r1s = r1.and_then(|p| self.state_at(&b, p).map(|s| (p, s)));
        let r2s = r2.and_then(|p| self.state_at(&b, p).map(|s| (p, s)));

        if let Some(cv) = c {
            let pc = mesh.vertex(cv);
            let mut cands: Vec<(f64, Pred)> = Vec::new();
            for (p, st) in [r1s, r2s].into_iter().flatten() {
                let ex = face_exit(mesh, &st);
                if mesh.edge(ex.edge).has_vertex(cv) {
                    let cost = st.cost + ex.length * wf + mesh.edge(ex.edge).weight * ex.point.dist(pc);
                    cands.push((cost, self.ray_pred(&b, p.span, self.param_of(&b, p), ex.point)));
                }
            }
            for (cl, st, p) in [(c1, b.first, b.first_pos()), (c2, b.last, b.last_pos())] {
                if cl == Class::Hit(cv) {
                    cands.push((st.cost + wf * st.pos.dist(pc), self.ray_pred(&b, p.span, self.param_of(&b, p), pc)));
                }
            }
            // the exact ray through the vertex, when it lies between two rays of one source
            let exact = match (guess, r1s, r2s) {
                (Some((a, _, q)), _, _) => Some((a.span, q)),
                (None, Some((a, sa)), Some((z, sz))) if a.span == z.span => {
                    self.ray_through(&b, a.span, self.param_of(&b, a), sa, self.param_of(&b, z), sz, pc)
                        .map(|q| (a.span, q))
                }
                _ => None,
            };
            if let Some((span, q)) = exact {
                if let Some(st) = self.state_param(&b, span, q) {
                    if self.class_of(&st).1.edge != usize::MAX {
                        cands.push((st.cost + wf * st.pos.dist(pc), self.ray_pred(&b, span, q, pc)));
                    }
                }
            }
            for (cost, pred) in cands {
                self.offer_vertex(cv, cost, pred, Some(f));
            }
        }

        let mut children = Vec::new();
        if let Some((p, st)) = r1s {
            if self.class_of(&st).0 == c1 {
                children.push((sub_spans(&b.spans, b.first_pos(), p), b.first, st));
            }
        }
        if let Some((p, st)) = r2s {
            if self.class_of(&st).0 == c2 {
                children.push((sub_spans(&b.spans, p, b.last_pos()), st, b.last));
            }
        }
        for (spans, first, last) in children {
            let nb = self.add_bundle(Bundle {
                spans,
                faces: b.faces.clone(),
                edges: b.edges.clone(),
                first,
                last,
                status: Status::Active,
                key: b.key,
                root: b.root,
            });
            let cls = (self.class_of(&first).0, self.class_of(&last).0);
            if cls.0 == cls.1 && matches!(cls.0, Class::Exit(_)) {
                self.place(nb);
            } else {
                // still straddling (probe noise); drop rather than recurse forever
                self.bundles[nb].status = Status::Terminated;
                self.diag.terminated += 1;
            }
        }
    }

    /// Continuous bisection between two rays of one span for the ray through `c`.
    #[allow(clippy::too_many_arguments)]
    fn ray_through(
        &self,
        b: &Bundle,
        span: usize,
        pa: f64,
        sa: RayState,
        pz: f64,
        sz: RayState,
        c: Point2,
    ) -> Option<f64> {
        let fa = side_of(&sa, c);
        let fz = side_of(&sz, c);
        if fa * fz > 0.0 {
            return None;
        }
        let (mut lo, mut hi) = (pa, pz);
        let mut best = if fmath::abs(fa) < fmath::abs(fz) { (pa, fa) } else { (pz, fz) };
        for _ in 0..80 {
            let m = 0.5 * (lo + hi);
            if m == lo || m == hi {
                break;
            }
            let st = self.state_param(b, span, m)?;
            let fm = side_of(&st, c);
            if fmath::abs(fm) < fmath::abs(best.1) {
                best = (m, fm);
            }
            if (fm < 0.0) == (fa < 0.0) {
                lo = m;
            } else {
                hi = m;
            }
        }
        Some(best.0)
    }

    /// Split point of a critical-segment bundle by interpolating along the entry edge: the
    /// rays are parallel, so strike points are affine in the launch offset.
    fn segment_guess(&mut self, b: &Bundle, cv: usize, c1: Class, c2: Class) -> Option<(Pos, Pos, f64)> {
        let q = self.segment_split_offset_of(b, cv)?;
        let span = b.spans[0];
        let src = &self.sources[span.source];
        let idx = (q - src.base) / src.step;
        let k = fmath::floor(idx - span.lo as f64) as i128;
        let n = span.len();
        let k = k.clamp(0, n - 2);
        let (a, z) = (Pos { span: 0, k }, Pos { span: 0, k: k + 1 });
        let ok = self.class_at(b, a) == Some(c1) && self.class_at(b, z) == Some(c2);
        if ok {
            self.diag.segment_interpolations += 1;
            Some((a, z, q))
        } else {
            self.diag.segment_search_fallbacks += 1;
            None
        }
    }

    fn segment_split_offset_of(&self, b: &Bundle, cv: usize) -> Option<f64> {
        let span = b.spans[0];
        if span.hi < span.lo || span.len() < 2 {
            return None;
        }
        let (xa, xb) = (b.first.pos, b.last.pos);
        let d = b.first.dir;
        let c = self.mesh.vertex(cv);
        let den = (xb - xa).cross(d);
        if den == 0.0 {
            return None;
        }
        // x'' = xa + s (xb - xa) lies on the line through c along d
        let lambda = (c - xa).cross(d) / den;
        let src = &self.sources[span.source];
        let (oa, ob) = (src.param(span.lo), src.param(span.hi));
        Some(oa + lambda.clamp(0.0, 1.0) * (ob - oa))
    }

    /// Launch offset on the critical segment whose ray passes through the split vertex of an
    /// active segment bundle that straddles it.
    pub fn segment_split_offset(&self, bid: usize) -> Option<f64> {
        let b = &self.bundles[bid];
        let Entry::Edge(e) = b.first.entry else { return None };
        self.segment_split_offset_of(b, self.mesh.apex(b.face(), e))
    }

    fn exit_state(&self, b: &Bundle, p: Pos, edge: usize) -> Option<(RayState, FaceExit)> {
        let st = self.state_at(b, p)?;
        let ex = face_exit(self.mesh, &st);
        (ex.edge == edge && ex.vertex.is_none()).then_some((st, ex))
    }

    fn incidence_at(&self, b: &Bundle, p: Pos, edge: usize) -> Option<f64> {
        let (st, _) = self.exit_state(b, p, edge)?;
        Some(cross_edge(self.mesh, edge, st.face, st.dir)?.incidence)
    }

    /// State of the ray at `p` after refracting across `edge`.
    fn refracted(&self, b: &Bundle, p: Pos, edge: usize) -> Option<RayState> {
        let (st, ex) = self.exit_state(b, p, edge)?;
        let cr = cross_edge(self.mesh, edge, st.face, st.dir)?;
        let th = cr.refracted_angle()?;
        Some(RayState {
            pos: ex.point,
            dir: cr.frame.direction(th),
            cost: st.cost + ex.length * self.mesh.face_weight(st.face),
            face: cr.to_face,
            entry: Entry::Edge(edge),
        })
    }

    fn dominated(&self, b: &Bundle, edge: usize, to: usize, a: (Point2, f64), z: (Point2, f64)) -> bool {
        let Some(list) = self.cover.get(&(edge, to)) else { return false };
        let mesh = self.mesh;
        let (ua, uz) = (mesh.edge_param(edge, a.0), mesh.edge_param(edge, z.0));
        let (lo, hi) = (ua.min(uz), ua.max(uz));
        const U_TOL: f64 = 1e-9;
        let slack = |c: f64| c * (1.0 + 1e-12);
        let mut mid: Option<Option<(f64, f64)>> = None;
        for r in list.iter().filter(|r| r.root == b.root) {
            if !(r.u0 - U_TOL <= lo && hi <= r.u1 + U_TOL) {
                continue;
            }
            if r.cost_at(ua) > slack(a.1) || r.cost_at(uz) > slack(z.1) {
                continue;
            }
            let m = *mid.get_or_insert_with(|| {
                let g = b.ray_count() / 2;
                let p = pos_at(&b.spans, g);
                self.exit_state(b, p, edge).map(|(st, ex)| {
                    (mesh.edge_param(edge, ex.point), st.cost + ex.length * mesh.face_weight(st.face))
                })
            });
            if let Some((um, cm)) = m {
                if r.cost_at(um) <= slack(cm) {
                    return true;
                }
            }
        }
        false
    }

    fn crit_class(inc: f64, tc: Option<f64>) -> Crit {
        let Some(tc) = tc else { return Crit::Refract };
        let a = fmath::abs(inc);
        if fmath::abs(a - tc) <= TAU_CRIT {
            Crit::Critical
        } else if a > tc {
            Crit::Beyond
        } else {
            Crit::Refract
        }
    }

    /// Bisects between a non-refracting and a refracting ray of one span for the critical ray.
    fn critical_between(&mut self, b: &Bundle, rp: Pos, r: Pos, edge: usize, tc: f64) -> Option<CritRay> {
        if rp.span != r.span {
            self.diag.critical_fallbacks += 1;
            return None;
        }
        let span = rp.span;
        let (mut p0, mut p1) = (self.param_of(b, rp), self.param_of(b, r));
        let inc_of = |this: &Self, p: f64| -> Option<(f64, RayState, FaceExit)> {
            let st = this.state_param(b, span, p)?;
            let ex = face_exit(this.mesh, &st);
            if ex.edge != edge || ex.vertex.is_some() {
                return None;
            }
            Some((cross_edge(this.mesh, edge, st.face, st.dir)?.incidence, st, ex))
        };
        for _ in 0..80 {
            let m = 0.5 * (p0 + p1);
            if m == p0 || m == p1 {
                break;
            }
            match inc_of(self, m) {
                Some((inc, _, _)) if fmath::abs(inc) >= tc => p0 = m,
                Some(_) => p1 = m,
                None => break,
            }
        }
        let Some((inc, st, ex)) = inc_of(self, p0) else {
            self.diag.critical_fallbacks += 1;
            return None;
        };
        if fmath::abs(fmath::abs(inc) - tc) > 1e-7 {
            self.diag.critical_fallbacks += 1;
            return None;
        }
        let s = b.spans[span];
        Some(CritRay {
            source: s.source,
            param: p0,
            face0: b.faces[s.start],
            hops: Self::hops(b, span),
            point: ex.point,
            cost: st.cost + ex.length * self.mesh.face_weight(st.face),
            incidence: inc,
        })
    }

    /// Creates the critical segment (with its reflected ray bundle) and the critical source at
    /// `y′`. Returns the Steiner source and its last index when the fan is non-empty.
    fn handle_critical_incidence(
        &mut self,
        root: usize,
        heavy: usize,
        edge: usize,
        cr: &CritRay,
        neighbour: Option<f64>,
    ) -> Result<Option<(usize, i128)>, CriticalError> {
        if self.sources[cr.source].is_segment() {
            self.diag.critical_rejected += 1;
            return Err(CriticalError::FromSegment);
        }
        let mesh = self.mesh;
        let light = mesh.edge(edge).other_face(heavy).unwrap();
        let frame = edge_frame(mesh, edge, light);
        let s = sgn(cr.incidence);
        let tangent = frame.tangent * s;
        let [v0, v1] = mesh.edge(edge).vertices;
        let far = if s > 0.0 { v1 } else { v0 };
        let len = cr.point.dist(mesh.vertex(far));
        let reach = Pred::Ray { source: cr.source, param: cr.param, face: cr.face0, hops: cr.hops, end: cr.point };
        let w_e = mesh.edge(edge).weight;

        let phi_k = FRAC_PI_2 - self.params.eps_prime;
        let (count, base, step) = match neighbour {
            Some(a) if phi_k - fmath::abs(a) > 0.0 => {
                let width = phi_k - fmath::abs(a);
                let k = (fmath::ceil(width / self.params.delta) as i128).max(1);
                (k + 1, fmath::abs(a), width / k as f64)
            }
            Some(_) => (0, 0.0, 0.0),
            None => {
                self.diag.steiner_fallbacks += 1;
                (0, 0.0, 0.0)
            }
        };
        let csrc = self.add_source(Source {
            kind: SourceKind::Critical { edge, face: light, parent: cr.source, reach, tangent, normal: frame.normal },
            origin: cr.point,
            cost: cr.cost,
            root,
            base,
            step,
            count: Some(count),
        });
        self.diag.critical_sources += 1;

        self.offer_vertex(far, cr.cost + w_e * len, reach, None);

        let sigma = self.params.sigma;
        if len - sigma > 0.0 {
            let ks = (fmath::ceil((len - sigma) / sigma) as i128).max(1);
            let tc = critical_angle(mesh.face_weight(heavy), mesh.face_weight(light)).unwrap_or(FRAC_PI_2);
            let dir = (tangent * fmath::sin(tc) - frame.normal * fmath::cos(tc)).normalized();
            let ssrc = self.add_source(Source {
                kind: SourceKind::Segment {
                    edge,
                    face: heavy,
                    critical: Some(csrc),
                    far_vertex: far,
                    dir,
                    tangent,
                    length: len,
                    edge_weight: w_e,
                    reach,
                },
                origin: cr.point,
                cost: cr.cost,
                root,
                base: 0.0,
                step: (len - sigma) / ks as f64,
                count: Some(ks + 1),
            });
            self.diag.critical_segments += 1;
            self.launch_segment(ssrc, edge, heavy, ks, root);
        }
        Ok((count > 0).then_some((csrc, count - 1)))
    }

    fn terminate(&mut self, bid: usize) {
        self.bundles[bid].status = Status::Terminated;
        self.diag.terminated += 1;
    }

    /// Handles the siblings striking `edge`: crosses it, or splits, or eliminates.
    pub fn extend_bundle(&mut self, bid: usize, edge: usize) {
        if self.bundles[bid].status != Status::Active {
            return;
        }
        let mesh = self.mesh;
        let b = self.bundles[bid].clone();
        let f = b.face();
        let wf = mesh.face_weight(f);
        let xa = face_exit(mesh, &b.first);
        let xz = face_exit(mesh, &b.last);
        let Some(to) = mesh.edge(edge).other_face(f) else {
            self.terminate(bid);
            return;
        };
        if b.faces.len() > self.crossing_budget {
            self.diag.crossing_budget_hits += 1;
            self.terminate(bid);
            return;
        }
        let ca = b.first.cost + xa.length * wf;
        let cz = b.last.cost + xz.length * wf;
        if self.dominated(&b, edge, to, (xa.point, ca), (xz.point, cz)) {
            self.bundles[bid].status = Status::Eliminated;
            self.diag.eliminated += 1;
            return;
        }

        let tc = critical_angle(wf, mesh.face_weight(to));
        let cra = cross_edge(mesh, edge, f, b.first.dir).unwrap();
        let crz = cross_edge(mesh, edge, f, b.last.dir).unwrap();
        let ka = Self::crit_class(cra.incidence, tc);
        let kz = Self::crit_class(crz.incidence, tc);

        let (mut lo, mut hi) = (b.first_pos(), b.last_pos());
        let mut steiner_lo: Option<(usize, i128)> = None;
        let mut steiner_hi: Option<(usize, i128)> = None;
        if let (Some(tc), true) = (tc, ka != Crit::Refract || kz != Crit::Refract) {
            let (sa, sz) = (sgn(cra.incidence), sgn(crz.incidence));
            if ka != Crit::Refract && kz != Crit::Refract && sa == sz {
                self.terminate(bid);
                return;
            }
            let beyond = |this: &Self, p: Pos, side: f64| -> bool {
                match this.incidence_at(&b, p, edge) {
                    Some(inc) => Self::crit_class(inc, Some(tc)) != Crit::Refract && sgn(inc) == side,
                    None => true,
                }
            };
            if ka != Crit::Refract {
                let (rp, r) = search(&b.spans, |p| p == b.first_pos() || beyond(self, p, sa));
                lo = r;
                if let Some(cr) = self.critical_between(&b, rp, r, edge, tc) {
                    let nb = self.refracted(&b, r, edge).map(|s| edge_frame(mesh, edge, to).angle_of(s.dir));
                    if let Ok(Some(s)) = self.handle_critical_incidence(b.root, f, edge, &cr, nb) {
                        steiner_lo = Some(s);
                    }
                }
            }
            if kz != Crit::Refract {
                let (r, rp) = search(&b.spans, |p| p != b.last_pos() && !beyond(self, p, sz));
                hi = r;
                if let Some(cr) = self.critical_between(&b, rp, r, edge, tc) {
                    let nb = self.refracted(&b, r, edge).map(|s| edge_frame(mesh, edge, to).angle_of(s.dir));
                    if let Ok(Some(s)) = self.handle_critical_incidence(b.root, f, edge, &cr, nb) {
                        steiner_hi = Some(s);
                    }
                }
            }
            if lo > hi {
                self.terminate(bid);
                return;
            }
        }

        let first_new = if lo == b.first_pos() {
            cra.out_dir().map(|d| RayState { pos: xa.point, dir: d, cost: ca, face: to, entry: Entry::Edge(edge) })
        } else {
            self.refracted(&b, lo, edge)
        };
        let last_new = if hi == b.last_pos() {
            crz.out_dir().map(|d| RayState { pos: xz.point, dir: d, cost: cz, face: to, entry: Entry::Edge(edge) })
        } else {
            self.refracted(&b, hi, edge)
        };
        let (Some(mut first_new), Some(mut last_new)) = (first_new, last_new) else {
            self.terminate(bid);
            return;
        };

        let start = b.faces.len();
        let mut spans = Vec::new();
        if let Some((src, k)) = steiner_lo {
            spans.push(Span { source: src, lo: k, hi: 0, start });
            let s = &self.sources[src];
            first_new = s.ray(s.param(k), to);
        }
        spans.extend(sub_spans(&b.spans, lo, hi));
        if let Some((src, k)) = steiner_hi {
            spans.push(Span { source: src, lo: 0, hi: k, start });
            let s = &self.sources[src];
            last_new = s.ray(s.param(k), to);
        }

        let nb = &mut self.bundles[bid];
        nb.spans = spans;
        nb.faces.push(to);
        nb.edges.push(edge);
        nb.first = first_new;
        nb.last = last_new;
        nb.key = self.cur_key;

        let rec = Cover::new(
            b.root,
            (mesh.edge_param(edge, first_new.pos), first_new.cost),
            (mesh.edge_param(edge, last_new.pos), last_new.cost),
        );
        self.cover.entry((edge, to)).or_default().push(rec);
        if self.record_snapshots {
            let nb = &self.bundles[bid];
            self.snapshots.push(Snapshot {
                edge,
                face: to,
                root: nb.root,
                spans: nb.spans.clone(),
                faces: nb.faces.clone(),
                edges: nb.edges.clone(),
            });
        }
        if self.opts.check_invariants {
            self.check_divergence(bid);
        }
        self.place(bid);
    }

    /// Traces 10 rays spread over the bundle and checks no two cross inside any face.
    pub fn check_divergence(&mut self, bid: usize) -> usize {
        const SAMPLES: i128 = 10;
        let b = &self.bundles[bid];
        let n = b.ray_count();
        let mut prints: Vec<Footprint> = Vec::new();
        let mut last_g = -1;
        for i in 0..SAMPLES {
            let g = if n <= 1 { 0 } else { i * (n - 1) / (SAMPLES - 1) };
            if g == last_g {
                continue;
            }
            last_g = g;
            let p = pos_at(&b.spans, g);
            let s = b.spans[p.span];
            let mut fp = Footprint::new();
            let src = &self.sources[s.source];
            if resolve(self.mesh, src, src.param(s.at(p.k)), &b.faces, &b.edges, s.start, Some(&mut fp)).is_some() {
                prints.push(fp);
            }
        }
        let tol = self.mesh.tol();
        let mut bad = 0;
        for i in 0..prints.len() {
            for j in i + 1..prints.len() {
                for &(fi, a0, a1) in &prints[i] {
                    for &(fj, b0, b1) in &prints[j] {
                        if fi == fj && crosses(a0, a1, b0, b1, tol) {
                            bad += 1;
                        }
                    }
                }
            }
        }
        self.diag.divergence_checks += 1;
        self.diag.divergence_violations += bad;
        bad
    }

    /// Runs until `stop` is settled (or the heap empties).
    pub fn run_until(&mut self, stop: Option<usize>, obs: &mut dyn Observer) -> Result<(), RunError> {
        loop {
            if self.diag.events >= self.opts.event_budget {
                return Err(RunError::EventBudget { diagnostics: self.diag });
            }
            match self.step(obs) {
                Step::Empty => return Ok(()),
                Step::Settled(v) if Some(v) == stop => return Ok(()),
                _ => {}
            }
        }
    }

    /// Bundle index that currently carries `global` in-order ray `g` (test helper).
    pub fn bundle_param(&self, bid: usize, g: i128) -> (usize, f64) {
        let b = &self.bundles[bid];
        let p = pos_at(&b.spans, g);
        (b.spans[p.span].source, self.param_of(b, p))
    }

    /// Sibling positions are successive when their in-order offsets differ by one.
    pub fn positions_adjacent(spans: &[Span], a: Pos, z: Pos) -> bool {
        next_pos(spans, a) == Some(z) || global_index(spans, z) == global_index(spans, a) + 1
    }
}

/// Proper crossing of segments ab and cd, ignoring touches within `tol`.
fn crosses(a: Point2, b: Point2, c: Point2, d: Point2, tol: f64) -> bool {
    let lab = a.dist(b);
    let lcd = c.dist(d);
    if lab == 0.0 || lcd == 0.0 {
        return false;
    }
    let o1 = orient(a, b, c) / lab;
    let o2 = orient(a, b, d) / lab;
    let o3 = orient(c, d, a) / lcd;
    let o4 = orient(c, d, b) / lcd;
    let strict = |x: f64| fmath::abs(x) > tol;
    strict(o1) && strict(o2) && strict(o3) && strict(o4) && o1 * o2 < 0.0 && o3 * o4 < 0.0
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::compute_stats;
    use crate::oracle::{build_steiner_graph, shortest_tree};
    use crate::wavefront::params::{compute_params, Mode};

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn two(w1: f64, w2: f64) -> WeightedMesh {
        WeightedMesh::new(
            vec![p(0.0, -1.0), p(1.0, -1.0), p(2.0, -1.0), p(0.0, 1.0), p(1.0, 1.0), p(2.0, 1.0)],
            vec![([0, 1, 4], w1), ([0, 4, 3], w1), ([1, 2, 5], w2), ([1, 5, 4], w2)],
        )
        .unwrap()
    }

    /// Slightly sheared 4x4 grid, weights cycling through 1..=8.
    fn grid() -> WeightedMesh {
        let id = |i: usize, j: usize| j * 5 + i;
        let v = (0..5).flat_map(|j| (0..5).map(move |i| p(i as f64 + 0.1 * ((i * j) % 3) as f64, j as f64))).collect();
        let w = |t: usize| (1 + (t * 7 + 1) % 8) as f64;
        let mut f = Vec::new();
        for j in 0..4 {
            for i in 0..4 {
                let t = 2 * (j * 4 + i);
                f.push(([id(i, j), id(i + 1, j), id(i + 1, j + 1)], w(t)));
                f.push(([id(i, j), id(i + 1, j + 1), id(i, j + 1)], w(t + 1)));
            }
        }
        WeightedMesh::new(v, f).unwrap()
    }

    fn engine(m: &WeightedMesh) -> Engine<'_> {
        let pr = compute_params(&compute_stats(m), 0.1, Mode::Practical).unwrap();
        Engine::new(m, &pr, &RunOptions { check_invariants: true, ..Default::default() })
    }

    fn exhaust(m: &WeightedMesh, s: usize) -> Engine<'_> {
        let mut e = engine(m);
        e.start(s);
        e.run_until(None, &mut Silent).unwrap();
        e
    }

    /// Every reached vertex inside [oracle - slack, (1 + eps)(oracle + slack)].
    fn assert_in_band(m: &WeightedMesh, e: &Engine, s: usize) {
        let g = build_steiner_graph(m, 64);
        let tree = shortest_tree(&g, s).unwrap();
        for v in 0..m.vertices().len() {
            let o = tree.result(v).unwrap();
            let d = e.distance(v).unwrap();
            assert!(d >= o.cost - o.slack - 1e-9 && d <= 1.1 * (o.cost + o.slack), "v{v}: {d} vs {o:?}");
        }
    }

    #[test]
    fn fan_covers_incident_wedges() {
        let m = two(1.0, 1.0);
        let mut e = engine(&m);
        e.start(4);
        // vertex 4 sits on the top boundary: faces 0, 1, 3 fill a half turn
        assert_eq!(e.bundles().len(), 3);
        let rays: i128 = e.bundles().iter().map(|b| b.ray_count()).sum();
        let want = core::f64::consts::PI / e.fan_step();
        assert!((rays as f64 - want).abs() <= 4.0, "{rays} vs {want}");
        for b in e.bundles() {
            assert_eq!(b.spans.len(), 1);
            let (lo, hi) = (b.spans[0].lo, b.spans[0].hi);
            assert!(lo <= hi);
        }
    }

    #[test]
    fn arrival_face_is_skipped() {
        let m = two(1.0, 1.0);
        let mut e = engine(&m);
        e.init_vertex_wavefront(4, Some(0), 1.0);
        assert_eq!(e.bundles().len(), 2);
        assert!(e.bundles().iter().all(|b| b.face() != 0));
    }

    #[test]
    fn split_children_are_successive() {
        let m = two(1.0, 1.0);
        let mut e = engine(&m);
        e.start(3);
        while e.diagnostics().splits == 0 {
            assert_ne!(e.step(&mut Silent), Step::Empty);
        }
        let bs = e.bundles();
        let parent = bs.iter().position(|b| b.status == Status::Split).unwrap();
        let kids: Vec<&Bundle> = bs[parent + 1..].iter().filter(|c| c.faces == bs[parent].faces).take(2).collect();
        assert_eq!(kids.len(), 2);
        let (a, z) = (kids[0].spans.last().unwrap(), kids[1].spans[0]);
        assert_eq!(a.source, z.source);
        assert_eq!((a.hi - z.lo).abs(), 1, "{a:?} {z:?}");
        // the two probe rays leave the face through different edges
        let (x1, x2) = (face_exit(&m, &kids[0].last), face_exit(&m, &kids[1].first));
        assert_ne!(x1.edge, x2.edge);
    }

    #[test]
    fn critical_incidence_spawns_sources() {
        let m = two(4.0, 1.0);
        let e = exhaust(&m, 3);
        let d = e.diagnostics();
        assert!(d.critical_sources > 0 && d.critical_segments > 0, "{d:?}");
        assert_eq!(d.divergence_violations, 0);
        assert_in_band(&m, &e, 3);
    }

    #[test]
    fn crossing_bundles_are_eliminated() {
        let m = grid();
        let e = exhaust(&m, 0);
        let d = e.diagnostics();
        assert!(d.eliminated > 0, "{d:?}");
        assert_eq!((d.heap_violations, d.divergence_violations), (0, 0));
        assert_in_band(&m, &e, 0);
    }

    #[test]
    fn steps_settle_each_vertex_once() {
        let m = two(1.0, 4.0);
        let mut e = engine(&m);
        e.start(3);
        let mut settled = Vec::new();
        loop {
            match e.step(&mut Silent) {
                Step::Settled(v) => settled.push(v),
                Step::Idle => {}
                Step::Empty => break,
            }
        }
        settled.sort_unstable();
        assert_eq!(settled, [0, 1, 2, 4, 5]);
        assert!(e.distances().iter().all(|d| d.is_some()));
    }
}
