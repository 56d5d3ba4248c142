//! Single-source shortest path map: the wavefront run to exhaustion, with the bundles that
//! entered each (edge, face) pair kept as a lower envelope of disjoint pieces.

use alloc::vec::Vec;
use core::fmt;

use crate::geom::Point2;
use crate::mesh::{Location, WeightedMesh};

use super::bundle::{pos_at, resolve, Pos, Span};
use super::engine::{Diagnostics, Engine, RunError, RunOptions, Silent, Snapshot};
use super::params::DiscretizationParams;
use super::path::{pred_path, vertex_path};
use super::source::{Pred, Source};

/// Part of an edge (parameter interval, as seen from `face`) owned by one snapshot.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Piece {
    pub snapshot: usize,
    pub u0: f64,
    pub u1: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgePieces {
    pub edge: usize,
    pub face: usize,
    pub pieces: Vec<Piece>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpMap {
    pub source: usize,
    pub params: DiscretizationParams,
    pub sources: Vec<Source>,
    pub snapshots: Vec<Snapshot>,
    pub envelope: Vec<EdgePieces>,
    pub dist: Vec<Option<f64>>,
    pub pred: Vec<Option<Pred>>,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QueryError {
    Outside,
    Unreachable,
}

impl fmt::Display for QueryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryError::Outside => write!(f, "query point lies outside the mesh"),
            QueryError::Unreachable => write!(f, "query point unreachable"),
        }
    }
}

impl core::error::Error for QueryError {}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    pub cost: f64,
    pub polyline: Vec<Point2>,
}

const PROFILE_SAMPLES: i128 = 17;

fn snap_state(mesh: &WeightedMesh, sources: &[Source], s: &Snapshot, p: Pos) -> Option<crate::optics::RayState> {
    let sp = s.spans[p.span];
    let src = &sources[sp.source];
    resolve(mesh, src, src.param(sp.at(p.k)), &s.faces, &s.edges, sp.start, None)
}

fn ray_count(spans: &[Span]) -> i128 {
    spans.iter().map(|s| s.len()).sum()
}

/// (u, cost) samples of a snapshot along its entry edge, sorted by u.
fn profile(mesh: &WeightedMesh, sources: &[Source], s: &Snapshot) -> Vec<(f64, f64)> {
    let n = ray_count(&s.spans);
    let mut out = Vec::new();
    let mut last = -1;
    for i in 0..PROFILE_SAMPLES {
        let g = if n <= 1 { 0 } else { i * (n - 1) / (PROFILE_SAMPLES - 1) };
        if g == last {
            continue;
        }
        last = g;
        if let Some(st) = snap_state(mesh, sources, s, pos_at(&s.spans, g)) {
            out.push((mesh.edge_param(s.edge, st.pos), st.cost));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn profile_at(p: &[(f64, f64)], u: f64) -> Option<f64> {
    let (first, last) = (p.first()?, p.last()?);
    if u < first.0 || u > last.0 {
        return None;
    }
    if p.len() == 1 {
        return Some(first.1);
    }
    let i = p.partition_point(|x| x.0 <= u).clamp(1, p.len() - 1);
    let (a, b) = (p[i - 1], p[i]);
    if b.0 == a.0 {
        return Some(a.1.min(b.1));
    }
    Some(a.1 + (b.1 - a.1) * (u - a.0) / (b.0 - a.0))
}

fn envelope(mesh: &WeightedMesh, sources: &[Source], snaps: &[Snapshot]) -> Vec<EdgePieces> {
    let mut groups: alloc::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
    for (i, s) in snaps.iter().enumerate() {
        groups.entry((s.edge, s.face)).or_default().push(i);
    }
    let mut out = Vec::new();
    for ((edge, face), ids) in groups {
        let profs: Vec<(usize, Vec<(f64, f64)>)> =
            ids.iter().map(|&i| (i, profile(mesh, sources, &snaps[i]))).filter(|(_, p)| !p.is_empty()).collect();
        let mut cuts: Vec<f64> = profs.iter().flat_map(|(_, p)| [p[0].0, p[p.len() - 1].0]).collect();
        // crossings between profiles show up between sample points; use them all as breakpoints
        cuts.extend(profs.iter().flat_map(|(_, p)| p.iter().map(|x| x.0)));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut pieces: Vec<Piece> = Vec::new();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a <= 0.0 {
                continue;
            }
            let m = 0.5 * (a + b);
            let best = profs
                .iter()
                .filter_map(|(i, p)| profile_at(p, m).map(|c| (*i, c)))
                .min_by(|x, y| x.1.total_cmp(&y.1));
            let Some((owner, _)) = best else { continue };
            match pieces.last_mut() {
                Some(l) if l.snapshot == owner && l.u1 == a => l.u1 = b,
                _ => pieces.push(Piece { snapshot: owner, u0: a, u1: b }),
            }
        }
        // single-ray snapshots cover one point
        for (i, p) in &profs {
            if p.len() == 1 || p[0].0 == p[p.len() - 1].0 {
                let u = p[0].0;
                if !pieces.iter().any(|q| q.u0 <= u && u <= q.u1) {
                    pieces.push(Piece { snapshot: *i, u0: u, u1: u });
                }
            }
        }
        pieces.sort_by(|a, b| a.u0.total_cmp(&b.u0));
        out.push(EdgePieces { edge, face, pieces });
    }
    out
}

/// Runs the wavefront from `s` over the whole mesh and retains what queries need.
pub fn build_sssp_map(
    mesh: &WeightedMesh,
    s: usize,
    params: &DiscretizationParams,
    opts: &RunOptions,
) -> Result<SpMap, RunError> {
    if s >= mesh.vertices().len() {
        return Err(RunError::NoSuchVertex(s));
    }
    let mut eng = Engine::new(mesh, params, opts);
    eng.record_snapshots(true);
    eng.start(s);
    eng.run_until(None, &mut Silent)?;
    let sources = eng.sources.clone();
    let snapshots = core::mem::take(&mut eng.snapshots);
    let envelope = envelope(mesh, &sources, &snapshots);
    Ok(SpMap {
        source: s,
        params: *params,
        sources,
        snapshots,
        envelope,
        dist: eng.dist.clone(),
        pred: eng.pred.clone(),
        diagnostics: eng.diagnostics(),
    })
}

impl SpMap {
    /// Number of sampled points per (edge, face) claimed by more than one piece.
    pub fn overlap_count(&self) -> usize {
        let mut bad = 0;
        for g in &self.envelope {
            for w in g.pieces.windows(2) {
                if w[1].u0 < w[0].u1 {
                    bad += 1;
                }
            }
        }
        bad
    }

    pub fn vertex_path(&self, mesh: &WeightedMesh, v: usize) -> Option<Vec<Point2>> {
        self.dist[v]?;
        Some(vertex_path(mesh, &self.sources, &self.pred, v))
    }
}

fn group<'a>(map: &'a SpMap, edge: usize, face: usize) -> Option<&'a EdgePieces> {
    let i = map.envelope.binary_search_by(|g| (g.edge, g.face).cmp(&(edge, face))).ok()?;
    Some(&map.envelope[i])
}

/// Best ray of `snap` (entering at edge params within `[u0, u1]`) continued straight to `q`.
fn best_in_piece(
    mesh: &WeightedMesh,
    map: &SpMap,
    snap: &Snapshot,
    u0: f64,
    u1: f64,
    q: Point2,
    wq: f64,
) -> Option<(f64, Pred)> {
    let n = ray_count(&snap.spans);
    let eval = |g: i128| -> Option<(f64, crate::optics::RayState)> {
        let st = snap_state(mesh, &map.sources, snap, pos_at(&snap.spans, g))?;
        Some((st.cost + wq * st.pos.dist(q), st))
    };
    let u_of = |g: i128| snap_state(mesh, &map.sources, snap, pos_at(&snap.spans, g)).map(|s| mesh.edge_param(snap.edge, s.pos));
    // restrict to the piece: u is monotone along the in-order rays
    let (ua, uz) = (u_of(0)?, u_of(n - 1)?);
    let pad = 0.05 * (u1 - u0) + 1e-12;
    let (lo_u, hi_u) = (u0 - pad, u1 + pad);
    let inc = uz >= ua;
    let first_in = |this_lo: bool| -> i128 {
        // first g with u >= lo_u (increasing) etc.
        let (mut a, mut b) = (0i128, n);
        while a < b {
            let m = a + (b - a) / 2;
            let u = u_of(m).unwrap_or(if inc { f64::NEG_INFINITY } else { f64::INFINITY });
            let before = if this_lo == inc { u < lo_u } else { u > hi_u };
            if before {
                a = m + 1;
            } else {
                b = m;
            }
        }
        a
    };
    let g0 = first_in(true);
    let g1 = {
        // last g still inside
        let (mut a, mut b) = (g0, n);
        while a < b {
            let m = a + (b - a) / 2;
            let u = u_of(m).unwrap_or(f64::NAN);
            let inside = if inc { u <= hi_u } else { u >= lo_u };
            if inside {
                a = m + 1;
            } else {
                b = m;
            }
        }
        a - 1
    };
    if g1 < g0 {
        return None;
    }
    let h = |g: i128| eval(g).map(|x| x.0).unwrap_or(f64::INFINITY);
    // golden-section over integer positions
    let (mut a, mut b) = (g0, g1);
    const R: f64 = 0.381_966_011_250_105;
    while b - a > 3 {
        let span = (b - a) as f64;
        let c = a + ((span * R) as i128).max(1);
        let d = b - ((span * R) as i128).max(1);
        let (c, d) = if c >= d { (c, c + 1) } else { (c, d) };
        if h(c) <= h(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let mut best: Option<(f64, i128)> = None;
    for g in a..=b {
        let v = h(g);
        if v.is_finite() && best.map_or(true, |x| v < x.0) {
            best = Some((v, g));
        }
    }
    let (cost, g) = best?;
    let p = pos_at(&snap.spans, g);
    let sp = snap.spans[p.span];
    let src = &map.sources[sp.source];
    let pred = Pred::Ray {
        source: sp.source,
        param: src.param(sp.at(p.k)),
        face: snap.faces[sp.start],
        hops: snap.faces.len() - 1 - sp.start,
        end: q,
    };
    Some((cost, pred))
}

/// Approximate distance and path from the map's source to `q`.
pub fn query_sssp(mesh: &WeightedMesh, map: &SpMap, q: Point2) -> Result<QueryResult, QueryError> {
    let faces: Vec<usize> = match mesh.locate_point(q) {
        Location::Outside => return Err(QueryError::Outside),
        Location::Vertex(v) => {
            let cost = map.dist[v].ok_or(QueryError::Unreachable)?;
            return Ok(QueryResult { cost, polyline: vertex_path(mesh, &map.sources, &map.pred, v) });
        }
        Location::Edge(e) => mesh.edge(e).faces.iter().flatten().copied().collect(),
        Location::Face(f) => alloc::vec![f],
    };
    let on_edge = match mesh.locate_point(q) {
        Location::Edge(e) => Some(e),
        _ => None,
    };
    let mut best: Option<(f64, Pred)> = None;
    let mut consider = |c: f64, p: Pred| {
        if best.as_ref().map_or(true, |b| c < b.0) {
            best = Some((c, p));
        }
    };
    for &f in &faces {
        let wf = mesh.face_weight(f);
        for &v in &mesh.face(f).vertices {
            let Some(d) = map.dist[v] else { continue };
            let w = match on_edge {
                Some(e) if mesh.edge(e).has_vertex(v) => mesh.edge(e).weight,
                _ => wf,
            };
            consider(d + w * mesh.vertex(v).dist(q), Pred::Edge { from: v });
        }
        for &e in &mesh.face(f).edges {
            let Some(g) = group(map, e, f) else { continue };
            let wq = if on_edge == Some(e) { mesh.edge(e).weight } else { wf };
            for piece in &g.pieces {
                let snap = &map.snapshots[piece.snapshot];
                if let Some((c, p)) = best_in_piece(mesh, map, snap, piece.u0, piece.u1, q, wq) {
                    consider(c, p);
                }
            }
        }
    }
    let (cost, pred) = best.ok_or(QueryError::Unreachable)?;
    let polyline = pred_path(mesh, &map.sources, &map.pred, &pred, q);
    Ok(QueryResult { cost, polyline })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_interpolates_inside_only() {
        let p = [(0.0, 1.0), (0.5, 2.0), (1.0, 0.0)];
        assert_eq!(profile_at(&p, 0.25), Some(1.5));
        assert_eq!(profile_at(&p, 0.75), Some(1.0));
        assert_eq!(profile_at(&p, 1.0), Some(0.0));
        assert_eq!(profile_at(&p, -0.1), None);
        assert_eq!(profile_at(&[(0.3, 4.0)], 0.3), Some(4.0));
        assert_eq!(profile_at(&[], 0.3), None);
    }
}
