//! Bundles: ordered runs of rays sharing an edge-sequence suffix, traced only at the two ends.

use alloc::vec::Vec;

use crate::mesh::WeightedMesh;
use crate::optics::{cross_edge, face_exit, Entry, RayState};

use super::source::Source;

/// A contiguous run of one source's ray indices, in order from `lo` to `hi` (`lo > hi` runs
/// downward). The rays enter the bundle at `faces[start]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Span {
    pub source: usize,
    pub lo: i128,
    pub hi: i128,
    pub start: usize,
}

impl Span {
    pub fn len(&self) -> i128 {
        (self.hi - self.lo).abs() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ray index of the `k`-th ray of the run.
    pub fn at(&self, k: i128) -> i128 {
        if self.hi >= self.lo {
            self.lo + k
        } else {
            self.lo - k
        }
    }
}

/// A position in a bundle's in-order ray sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub span: usize,
    pub k: i128,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Status {
    Active,
    Split,
    Eliminated,
    /// Left the domain, stopped refracting, or ran out of crossing budget.
    Terminated,
}

#[derive(Clone, Debug)]
pub struct Bundle {
    pub spans: Vec<Span>,
    /// Faces visited; the last is the current face.
    pub faces: Vec<usize>,
    /// `edges[i]` separates `faces[i]` and `faces[i + 1]`.
    pub edges: Vec<usize>,
    /// Sibling pair, positioned at their entry into the current face.
    pub first: RayState,
    pub last: RayState,
    pub status: Status,
    pub key: f64,
    pub root: usize,
}

impl Bundle {
    pub fn first_pos(&self) -> Pos {
        Pos { span: 0, k: 0 }
    }

    pub fn last_pos(&self) -> Pos {
        let s = self.spans.len() - 1;
        Pos { span: s, k: self.spans[s].len() - 1 }
    }

    pub fn face(&self) -> usize {
        *self.faces.last().unwrap()
    }

    pub fn ray_count(&self) -> i128 {
        self.spans.iter().map(|s| s.len()).sum()
    }

    pub fn is_segment(&self, sources: &[Source]) -> bool {
        self.spans.iter().any(|s| sources[s.source].is_segment())
    }
}

pub fn next_pos(spans: &[Span], p: Pos) -> Option<Pos> {
    if p.k + 1 < spans[p.span].len() {
        Some(Pos { span: p.span, k: p.k + 1 })
    } else if p.span + 1 < spans.len() {
        Some(Pos { span: p.span + 1, k: 0 })
    } else {
        None
    }
}

pub fn prev_pos(spans: &[Span], p: Pos) -> Option<Pos> {
    if p.k > 0 {
        Some(Pos { span: p.span, k: p.k - 1 })
    } else if p.span > 0 {
        Some(Pos { span: p.span - 1, k: spans[p.span - 1].len() - 1 })
    } else {
        None
    }
}

/// In-order offset of `p` from the first ray.
pub fn global_index(spans: &[Span], p: Pos) -> i128 {
    spans[..p.span].iter().map(|s| s.len()).sum::<i128>() + p.k
}

pub fn pos_at(spans: &[Span], mut g: i128) -> Pos {
    for (i, s) in spans.iter().enumerate() {
        if g < s.len() {
            return Pos { span: i, k: g };
        }
        g -= s.len();
    }
    let s = spans.len() - 1;
    Pos { span: s, k: spans[s].len() - 1 }
}

/// Spans covering `from..=to`.
pub fn sub_spans(spans: &[Span], from: Pos, to: Pos) -> Vec<Span> {
    let mut out = Vec::new();
    for i in from.span..=to.span {
        let s = spans[i];
        let k0 = if i == from.span { from.k } else { 0 };
        let k1 = if i == to.span { to.k } else { s.len() - 1 };
        out.push(Span { source: s.source, lo: s.at(k0), hi: s.at(k1), start: s.start });
    }
    out
}

/// Last position where `pred` holds, and the one after it. Assumes `pred` holds at the first
/// position and fails at the last; searches span boundaries first, then inside one span.
pub fn search<F: FnMut(Pos) -> bool>(spans: &[Span], mut pred: F) -> (Pos, Pos) {
    let (mut lo, mut hi) = (0usize, spans.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if pred(Pos { span: mid, k: 0 }) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = lo;
    let n = spans[s].len();
    let last = s == spans.len() - 1;
    let (mut a, mut b) = (0i128, if last { n - 1 } else { n });
    while b - a > 1 {
        let mid = a + (b - a) / 2;
        if pred(Pos { span: s, k: mid }) {
            a = mid;
        } else {
            b = mid;
        }
    }
    let after = if b < n { Pos { span: s, k: b } } else { Pos { span: s + 1, k: 0 } };
    (Pos { span: s, k: a }, after)
}

/// Crossing points recorded while resolving, one `(face index, entry, exit)` per face.
pub type Footprint = Vec<(usize, crate::geom::Point2, crate::geom::Point2)>;

/// Re-traces the ray `param` of `src` from `faces[start]` through the listed edges. Returns its
/// state on entering the last face, or `None` if it leaves the sequence.
pub fn resolve(
    mesh: &WeightedMesh,
    src: &Source,
    param: f64,
    faces: &[usize],
    edges: &[usize],
    start: usize,
    mut footprint: Option<&mut Footprint>,
) -> Option<RayState> {
    let mut st = src.ray(param, faces[start]);
    if let Entry::Edge(e) = st.entry {
        if !mesh.edge(e).has_face(st.face) {
            return None;
        }
    }
    for i in start..faces.len() - 1 {
        let ex = face_exit(mesh, &st);
        if ex.edge != edges[i] || ex.vertex.is_some() {
            return None;
        }
        if let Some(fp) = footprint.as_deref_mut() {
            fp.push((i, st.pos, ex.point));
        }
        let cr = cross_edge(mesh, ex.edge, st.face, st.dir)?;
        let theta = cr.refracted_angle()?;
        if cr.to_face != faces[i + 1] {
            return None;
        }
        st = RayState {
            pos: ex.point,
            dir: cr.frame.direction(theta),
            cost: st.cost + ex.length * mesh.face_weight(st.face),
            face: cr.to_face,
            entry: Entry::Edge(ex.edge),
        };
    }
    Some(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn spans() -> Vec<Span> {
        vec![
            Span { source: 0, lo: 5, hi: 2, start: 0 },
            Span { source: 1, lo: 0, hi: 9, start: 0 },
        ]
    }

    #[test]
    fn ordering_helpers() {
        let s = spans();
        assert_eq!(s[0].len(), 4);
        assert_eq!(s[0].at(1), 4);
        assert_eq!(next_pos(&s, Pos { span: 0, k: 3 }), Some(Pos { span: 1, k: 0 }));
        assert_eq!(prev_pos(&s, Pos { span: 1, k: 0 }), Some(Pos { span: 0, k: 3 }));
        assert_eq!(global_index(&s, Pos { span: 1, k: 2 }), 6);
        assert_eq!(pos_at(&s, 6), Pos { span: 1, k: 2 });
        let sub = sub_spans(&s, Pos { span: 0, k: 2 }, Pos { span: 1, k: 1 });
        assert_eq!(sub[0].lo, 3);
        assert_eq!(sub[0].hi, 2);
        assert_eq!((sub[1].lo, sub[1].hi), (0, 1));
    }

    #[test]
    fn search_finds_boundary() {
        let s = spans();
        for cut in 0..13 {
            let (a, b) = search(&s, |p| global_index(&s, p) <= cut);
            assert_eq!(global_index(&s, a), cut);
            assert_eq!(global_index(&s, b), cut + 1);
        }
    }
}
