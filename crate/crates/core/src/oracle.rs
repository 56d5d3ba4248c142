//! Brute-force baseline: `m` equally spaced Steiner points per edge, every pair of points on a
//! face boundary joined through the face, Dijkstra over the result.
//!
//! Adjacency is implicit (face boundary lists), so a few thousand points per face stay cheap in
//! memory.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geom::Point2;
use crate::mesh::{Location, WeightedMesh};

#[derive(Clone, Debug, PartialEq)]
pub enum OracleError {
    Unreachable,
    NoSuchVertex(usize),
    Outside,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Unreachable => write!(f, "target unreachable"),
            OracleError::NoSuchVertex(v) => write!(f, "no vertex {v}"),
            OracleError::Outside => write!(f, "point outside the mesh"),
        }
    }
}

impl core::error::Error for OracleError {}

#[derive(Clone, Copy)]
struct Member {
    node: u32,
    /// Which of the face's three edges the node lies on.
    mask: u8,
}

pub struct SteinerGraph<'a> {
    mesh: &'a WeightedMesh,
    m: usize,
    positions: Vec<Point2>,
    face_nodes: Vec<Vec<Member>>,
    /// (face, mask) for every face a node touches.
    node_faces: Vec<Vec<(u32, u8)>>,
    /// Along-edge neighbours (consecutive nodes) and the edge weight.
    edge_nbrs: Vec<Vec<(u32, f64)>>,
    face_edge_w: Vec<[f64; 3]>,
    face_spacing: Vec<f64>,
    w_min: f64,
}

impl<'a> SteinerGraph<'a> {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn position(&self, node: usize) -> Point2 {
        self.positions[node]
    }

    /// Number of distinct node pairs joined by an arc.
    pub fn arc_count(&self) -> usize {
        let per_face: usize = self.face_nodes.iter().map(|l| l.len() * (l.len() - 1) / 2).sum();
        let k = self.m + 2;
        let shared = self.mesh.edges().iter().filter(|e| !e.is_boundary()).count();
        per_face - shared * (k * (k - 1) / 2)
    }

    /// Node id of the `k`-th interior point (0-based) on edge `e`.
    pub fn edge_node(&self, e: usize, k: usize) -> usize {
        self.mesh.vertices().len() + e * self.m + k
    }

    fn arc_weight(&self, f: usize, ma: u8, mb: u8) -> f64 {
        let common = ma & mb;
        if common != 0 {
            self.face_edge_w[f][common.trailing_zeros() as usize]
        } else {
            self.mesh.face_weight(f)
        }
    }
}

pub fn build_steiner_graph(mesh: &WeightedMesh, m: usize) -> SteinerGraph<'_> {
    let nv = mesh.vertices().len();
    let mut positions: Vec<Point2> = mesh.vertices().to_vec();
    for (ei, _) in mesh.edges().iter().enumerate() {
        let (a, b) = mesh.edge_points(ei);
        for k in 0..m {
            positions.push(a.lerp(b, (k + 1) as f64 / (m + 1) as f64));
        }
    }
    let mut face_nodes = Vec::with_capacity(mesh.faces().len());
    let mut node_faces = vec![Vec::new(); positions.len()];
    let mut face_edge_w = Vec::with_capacity(mesh.faces().len());
    let mut face_spacing = Vec::with_capacity(mesh.faces().len());
    for (fi, face) in mesh.faces().iter().enumerate() {
        let mut list = Vec::with_capacity(3 * (m + 1));
        for k in 0..3 {
            // vertex k lies on edges k and k-1
            let mask = (1u8 << k) | (1u8 << ((k + 2) % 3));
            list.push(Member { node: face.vertices[k] as u32, mask });
        }
        for k in 0..3 {
            let e = face.edges[k];
            for j in 0..m {
                list.push(Member { node: (nv + e * m + j) as u32, mask: 1 << k });
            }
        }
        for mb in &list {
            node_faces[mb.node as usize].push((fi as u32, mb.mask));
        }
        face_nodes.push(list);
        face_edge_w.push([
            mesh.edge(face.edges[0]).weight,
            mesh.edge(face.edges[1]).weight,
            mesh.edge(face.edges[2]).weight,
        ]);
        let longest = face.edges.iter().map(|&e| mesh.edge_length(e)).fold(0.0, f64::max);
        face_spacing.push(longest / (m + 1) as f64);
    }
    // same-edge pairs are collinear at one weight, so consecutive arcs give the same distances
    let mut edge_nbrs = vec![Vec::new(); positions.len()];
    for (ei, e) in mesh.edges().iter().enumerate() {
        let chain: Vec<usize> =
            core::iter::once(e.vertices[0]).chain((0..m).map(|k| nv + ei * m + k)).chain([e.vertices[1]]).collect();
        for w in chain.windows(2) {
            edge_nbrs[w[0]].push((w[1] as u32, e.weight));
            edge_nbrs[w[1]].push((w[0] as u32, e.weight));
        }
    }
    let w_min = mesh.faces().iter().map(|f| f.weight).fold(f64::INFINITY, f64::min);
    SteinerGraph { mesh, m, positions, face_nodes, node_faces, edge_nbrs, face_edge_w, face_spacing, w_min }
}

/// 4-ary min-heap over node ids with decrease-key; stays at most `n` long where a lazy heap
/// would grow with every successful relaxation.
struct IndexedHeap {
    items: Vec<(f64, u32)>,
    /// Slot of each node in `items`, or `NONE`.
    slot: Vec<u32>,
}

impl IndexedHeap {
    fn new(n: usize) -> Self {
        IndexedHeap { items: Vec::new(), slot: vec![NONE; n] }
    }

    fn less(a: (f64, u32), b: (f64, u32)) -> bool {
        a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
    }

    fn put(&mut self, i: usize, it: (f64, u32)) {
        self.items[i] = it;
        self.slot[it.1 as usize] = i as u32;
    }

    fn up(&mut self, mut i: usize) {
        let it = self.items[i];
        while i > 0 {
            let p = (i - 1) / 4;
            if !Self::less(it, self.items[p]) {
                break;
            }
            let pi = self.items[p];
            self.put(i, pi);
            i = p;
        }
        self.put(i, it);
    }

    fn down(&mut self, mut i: usize) {
        let it = self.items[i];
        let n = self.items.len();
        loop {
            let c0 = 4 * i + 1;
            if c0 >= n {
                break;
            }
            let mut c = c0;
            for k in c0 + 1..(c0 + 4).min(n) {
                if Self::less(self.items[k], self.items[c]) {
                    c = k;
                }
            }
            if !Self::less(self.items[c], it) {
                break;
            }
            let ci = self.items[c];
            self.put(i, ci);
            i = c;
        }
        self.put(i, it);
    }

    /// Inserts or lowers the key of `node`.
    fn push(&mut self, key: f64, node: u32) {
        match self.slot[node as usize] {
            NONE => {
                self.items.push((key, node));
                self.up(self.items.len() - 1);
            }
            i => {
                self.items[i as usize].0 = key;
                self.up(i as usize);
            }
        }
    }

    fn pop(&mut self) -> Option<(f64, u32)> {
        let top = *self.items.first()?;
        self.slot[top.1 as usize] = NONE;
        let last = self.items.pop().unwrap();
        if !self.items.is_empty() {
            self.items[0] = last;
            self.down(0);
        }
        Some(top)
    }
}

const NONE: u32 = u32::MAX;

/// Single-source shortest-path tree over a Steiner graph.
pub struct OracleTree<'g, 'a> {
    graph: &'g SteinerGraph<'a>,
    pub dist: Vec<f64>,
    pred: Vec<u32>,
    /// Face used by the arc into each node (`NONE` for along-edge arcs).
    pred_face: Vec<u32>,
}

#[inline]
fn len(a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    libm::sqrt(dx * dx + dy * dy)
}

/// Dijkstra from `s`; with `stop` it is A* towards that node (heuristic `w_min · |x - t|`,
/// consistent because every arc costs at least `w_min` per unit length).
fn dijkstra<'g, 'a>(g: &'g SteinerGraph<'a>, s: usize, stop: Option<usize>) -> OracleTree<'g, 'a> {
    let n = g.positions.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NONE; n];
    let mut pred_face = vec![NONE; n];
    let mut done = vec![false; n];
    let mut heap = IndexedHeap::new(n);
    let goal = stop.map(|t| g.positions[t]);
    let h = |p: Point2| goal.map_or(0.0, |t| g.w_min * len(p, t));
    dist[s] = 0.0;
    heap.push(h(g.positions[s]), s as u32);
    while let Some((_, a)) = heap.pop() {
        let a = a as usize;
        if done[a] {
            continue;
        }
        done[a] = true;
        if stop == Some(a) {
            break;
        }
        let d = dist[a];
        let pa = g.positions[a];
        let mut relax = |b: usize, nd: f64, face: u32, heap: &mut IndexedHeap| {
            if nd < dist[b] {
                dist[b] = nd;
                pred[b] = a as u32;
                pred_face[b] = face;
                heap.push(nd + h(g.positions[b]), b as u32);
            }
        };
        for &(b, w) in &g.edge_nbrs[a] {
            let b = b as usize;
            if !done[b] {
                relax(b, d + w * len(pa, g.positions[b]), NONE, &mut heap);
            }
        }
        for &(f, ma) in &g.node_faces[a] {
            let wf = g.mesh.face_weight(f as usize);
            for mb in &g.face_nodes[f as usize] {
                let b = mb.node as usize;
                // same-edge pairs go through `edge_nbrs`
                if done[b] || ma & mb.mask != 0 {
                    continue;
                }
                relax(b, d + wf * len(pa, g.positions[b]), f, &mut heap);
            }
        }
    }
    OracleTree { graph: g, dist, pred, pred_face }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub cost: f64,
    pub polyline: Vec<Point2>,
    /// True weighted-region distance is taken to lie in `[cost - slack, cost]`.
    pub slack: f64,
    pub m: usize,
}

impl<'g, 'a> OracleTree<'g, 'a> {
    /// Slack charge for a detour inside face `f`.
    fn face_charge(&self, f: usize) -> f64 {
        2.0 * self.graph.mesh.face_weight(f) * self.graph.face_spacing[f]
    }

    /// Travel along edge `e` could also have cut through either neighbour.
    fn edge_charge(&self, e: usize) -> f64 {
        self.graph.mesh.edge(e).faces.iter().flatten().map(|&f| self.face_charge(f)).fold(0.0, f64::max)
    }

    fn arc_edge(&self, a: usize, b: usize) -> Option<usize> {
        let g = self.graph;
        let nv = g.mesh.vertices().len();
        match (a >= nv, b >= nv) {
            (true, _) => Some((a - nv) / g.m),
            (_, true) => Some((b - nv) / g.m),
            _ => g.mesh.edge_between(a, b),
        }
    }

    /// Path back from `t`, and its slack: one charge per maximal run of arcs in the same
    /// face or along the same edge.
    fn walk(&self, t: usize) -> (Vec<Point2>, f64) {
        #[derive(PartialEq, Clone, Copy)]
        enum Run {
            Face(usize),
            Edge(usize),
        }
        let g = self.graph;
        let mut pts = Vec::new();
        let mut slack = 0.0;
        let mut last: Option<Run> = None;
        let mut v = t;
        pts.push(g.positions[v]);
        while self.pred[v] != NONE {
            let u = self.pred[v] as usize;
            let f = self.pred_face[v];
            let run = if f != NONE { Some(Run::Face(f as usize)) } else { self.arc_edge(u, v).map(Run::Edge) };
            if run != last {
                slack += match run {
                    Some(Run::Face(f)) => self.face_charge(f),
                    Some(Run::Edge(e)) => self.edge_charge(e),
                    None => 0.0,
                };
                last = run;
            }
            v = u;
            pts.push(g.positions[v]);
        }
        pts.reverse();
        (pts, slack)
    }

    pub fn result(&self, t: usize) -> Result<OracleResult, OracleError> {
        if !self.dist[t].is_finite() {
            return Err(OracleError::Unreachable);
        }
        let (polyline, slack) = self.walk(t);
        Ok(OracleResult { cost: self.dist[t], polyline, slack, m: self.graph.m })
    }

    /// Best connection from any boundary node of the face(s) containing `q`.
    pub fn to_point(&self, q: Point2) -> Result<OracleResult, OracleError> {
        let g = self.graph;
        let mesh = g.mesh;
        let (faces, on_edge): (Vec<usize>, Option<usize>) = match mesh.locate_point(q) {
            Location::Vertex(v) => return self.result(v),
            Location::Edge(e) => (mesh.edge(e).faces.iter().flatten().copied().collect(), Some(e)),
            Location::Face(f) => (vec![f], None),
            Location::Outside => return Err(OracleError::Outside),
        };
        let mut best: Option<(f64, usize, usize, bool)> = None;
        for f in faces {
            let qmask = match on_edge {
                Some(e) => 1u8 << mesh.face(f).edges.iter().position(|&x| x == e).unwrap(),
                None => 0,
            };
            for mb in &g.face_nodes[f] {
                let b = mb.node as usize;
                if !self.dist[b].is_finite() {
                    continue;
                }
                let along = qmask & mb.mask != 0;
                let w = g.arc_weight(f, qmask, mb.mask);
                let c = self.dist[b] + w * g.positions[b].dist(q);
                if best.map_or(true, |x| c < x.0) {
                    best = Some((c, b, f, along));
                }
            }
        }
        let (cost, b, f, along) = best.ok_or(OracleError::Unreachable)?;
        let (mut polyline, mut slack) = self.walk(b);
        polyline.push(q);
        slack += if along { on_edge.map_or(0.0, |e| self.edge_charge(e)) } else { self.face_charge(f) };
        Ok(OracleResult { cost, polyline, slack, m: g.m })
    }
}

pub fn shortest_tree<'g, 'a>(g: &'g SteinerGraph<'a>, s: usize) -> Result<OracleTree<'g, 'a>, OracleError> {
    if s >= g.mesh.vertices().len() {
        return Err(OracleError::NoSuchVertex(s));
    }
    Ok(dijkstra(g, s, None))
}

/// Exact shortest path between two mesh vertices in the graph.
pub fn oracle_shortest(g: &SteinerGraph<'_>, s: usize, t: usize) -> Result<OracleResult, OracleError> {
    let nv = g.mesh.vertices().len();
    for v in [s, t] {
        if v >= nv {
            return Err(OracleError::NoSuchVertex(v));
        }
    }
    dijkstra(g, s, Some(t)).result(t)
}

pub fn oracle_with_point(mesh: &WeightedMesh, m: usize, s: usize, q: Point2) -> Result<OracleResult, OracleError> {
    let g = build_steiner_graph(mesh, m);
    shortest_tree(&g, s)?.to_point(q)
}

/// Doubles `m` from 1 until `slack <= rel * cost` (or `m` would exceed `max_m`).
pub fn oracle_auto(mesh: &WeightedMesh, s: usize, t: usize, rel: f64, max_m: usize) -> Result<OracleResult, OracleError> {
    let mut m = 1;
    loop {
        let g = build_steiner_graph(mesh, m);
        let r = oracle_shortest(&g, s, t)?;
        if r.slack <= rel * r.cost || 2 * m > max_m {
            return Ok(r);
        }
        m *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn tri() -> WeightedMesh {
        WeightedMesh::new(vec![p(0.0, 0.0), p(4.0, 0.0), p(0.0, 3.0)], vec![([0, 1, 2], 2.0)]).unwrap()
    }

    #[test]
    fn counts() {
        let m = tri();
        let g0 = build_steiner_graph(&m, 0);
        assert_eq!((g0.node_count(), g0.arc_count()), (3, 3));
        let g1 = build_steiner_graph(&m, 1);
        assert_eq!((g1.node_count(), g1.arc_count()), (6, 15));
        let two = WeightedMesh::new(
            vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(2.0, 0.5)],
            vec![([0, 1, 2], 1.0), ([1, 3, 2], 2.0)],
        )
        .unwrap();
        assert_eq!(build_steiner_graph(&two, 2).node_count(), 14);
    }

    #[test]
    fn direct_arc_is_exact() {
        let m = tri();
        for k in [0, 1, 5] {
            let g = build_steiner_graph(&m, k);
            let r = oracle_shortest(&g, 1, 2).unwrap();
            assert!((r.cost - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn centroid_query() {
        let m = tri();
        let c = m.centroid(0);
        let r = oracle_with_point(&m, 3, 0, c).unwrap();
        assert!((r.cost - 2.0 * c.norm()).abs() < 1e-12);
        assert_eq!(oracle_with_point(&m, 3, 0, p(9.0, 9.0)), Err(OracleError::Outside));
        let v = oracle_with_point(&m, 3, 0, p(4.0, 0.0)).unwrap();
        assert!((v.cost - 8.0).abs() < 1e-12);
    }
}
