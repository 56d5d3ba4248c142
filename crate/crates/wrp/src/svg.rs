//! Deterministic SVG pictures of a mesh, a path and event points.

use std::fmt::Write as _;

use wrp_core::{Point2, WeightedMesh};

#[derive(Clone, Debug, Default)]
pub struct Overlay<'a> {
    pub path: Option<&'a [Point2]>,
    /// Sibling-pair strike points, drawn as short chords.
    pub chords: &'a [(Point2, Point2)],
    pub marks: &'a [Point2],
}

const SIZE: f64 = 800.0;
const PAD: f64 = 20.0;

/// Fixed 6-digit formatting keeps output byte-stable.
fn n(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

pub fn render(mesh: &WeightedMesh, ov: &Overlay) -> String {
    let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in mesh.vertices() {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
    let scale = (SIZE - 2.0 * PAD) / span;
    let w = (hi.x - lo.x) * scale + 2.0 * PAD;
    let h = (hi.y - lo.y) * scale + 2.0 * PAD;
    // y up in the mesh, down in SVG
    let tx = |p: Point2| (PAD + (p.x - lo.x) * scale, PAD + (hi.y - p.y) * scale);
    let (wmin, wmax) = mesh
        .faces()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), f| (a.min(f.weight), b.max(f.weight)));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        n(w),
        n(h),
        n(w),
        n(h)
    );
    let _ = writeln!(s, r#"<g id="faces" stroke="none">"#);
    for (i, f) in mesh.faces().iter().enumerate() {
        // heavier is darker
        let t = if wmax > wmin { (f.weight - wmin) / (wmax - wmin) } else { 0.0 };
        let g = (235.0 - 150.0 * t).round() as u8;
        let pts: Vec<String> = mesh
            .face_points(i)
            .iter()
            .map(|&p| {
                let (x, y) = tx(p);
                format!("{},{}", n(x), n(y))
            })
            .collect();
        let _ = writeln!(s, r#"<polygon points="{}" fill="rgb({g},{g},{g})" data-weight="{}"/>"#, pts.join(" "), f.weight);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g id="edges" stroke="#444" stroke-width="0.8">"##);
    for e in 0..mesh.edges().len() {
        let (a, b) = mesh.edge_points(e);
        let ((x1, y1), (x2, y2)) = (tx(a), tx(b));
        let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, n(x1), n(y1), n(x2), n(y2));
    }
    let _ = writeln!(s, "</g>");
    if !ov.chords.is_empty() {
        let _ = writeln!(s, r##"<g id="bundles" stroke="#1f77b4" stroke-width="0.6" opacity="0.6">"##);
        for &(a, b) in ov.chords {
            let ((x1, y1), (x2, y2)) = (tx(a), tx(b));
            let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, n(x1), n(y1), n(x2), n(y2));
        }
        let _ = writeln!(s, "</g>");
    }
    if !ov.marks.is_empty() {
        let _ = writeln!(s, r##"<g id="marks" fill="#2ca02c">"##);
        for &p in ov.marks {
            let (x, y) = tx(p);
            let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="2"/>"#, n(x), n(y));
        }
        let _ = writeln!(s, "</g>");
    }
    if let Some(path) = ov.path {
        let pts: Vec<String> = path
            .iter()
            .map(|&p| {
                let (x, y) = tx(p);
                format!("{},{}", n(x), n(y))
            })
            .collect();
        let _ = writeln!(s, r##"<polyline id="path" points="{}" fill="none" stroke="#d62728" stroke-width="2"/>"##, pts.join(" "));
    }
    s.push_str("</svg>\n");
    s
}
