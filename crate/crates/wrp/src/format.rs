//! The `WRP 1` mesh text format and the SSSP map file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wrp_core::wavefront::SpMap;
use wrp_core::{MeshError, Point2, WeightedMesh};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid mesh: {0}")]
    Invalid(#[from] MeshError),
    #[error("corrupt map file: {0}")]
    CorruptMap(String),
}

fn io_err(path: &Path, e: std::io::Error) -> FormatError {
    FormatError::Io { path: path.display().to_string(), source: e }
}

/// Non-empty, comment-stripped lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap().trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| FormatError::Parse { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| FormatError::Parse { line, msg: format!("bad {what} '{tok}'") })
}

pub fn parse_mesh(text: &str) -> Result<WeightedMesh, FormatError> {
    let mut lines = content_lines(text);
    let eof = |what: &str| FormatError::Parse { line: text.lines().count(), msg: format!("unexpected end of file, expected {what}") };
    let (ln, header) = lines.next().ok_or_else(|| eof("header"))?;
    if header.split_whitespace().collect::<Vec<_>>() != ["WRP", "1"] {
        return Err(FormatError::Parse { line: ln, msg: format!("expected 'WRP 1', got '{header}'") });
    }
    let (ln, l) = lines.next().ok_or_else(|| eof("vertex count"))?;
    let nv: usize = field(Some(l), ln, "vertex count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| eof("vertex"))?;
        let mut t = l.split_whitespace();
        let x: f64 = field(t.next(), ln, "x")?;
        let y: f64 = field(t.next(), ln, "y")?;
        if t.next().is_some() {
            return Err(FormatError::Parse { line: ln, msg: "trailing tokens".into() });
        }
        vertices.push(Point2::new(x, y));
    }
    let (ln, l) = lines.next().ok_or_else(|| eof("face count"))?;
    let nf: usize = field(Some(l), ln, "face count")?;
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines.next().ok_or_else(|| eof("face"))?;
        let mut t = l.split_whitespace();
        let i = field(t.next(), ln, "vertex index")?;
        let j = field(t.next(), ln, "vertex index")?;
        let k = field(t.next(), ln, "vertex index")?;
        let w: f64 = field(t.next(), ln, "weight")?;
        if t.next().is_some() {
            return Err(FormatError::Parse { line: ln, msg: "trailing tokens".into() });
        }
        faces.push(([i, j, k], w));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(FormatError::Parse { line: ln, msg: "more lines than declared".into() });
    }
    Ok(WeightedMesh::new(vertices, faces)?)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<WeightedMesh, FormatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_mesh(&text)
}

/// Shortest decimal that reads back to the same double (what `Display` for f64 gives).
pub fn write_mesh(mesh: &WeightedMesh) -> String {
    let mut s = String::from("WRP 1\n");
    let _ = writeln!(s, "{}", mesh.vertices().len());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    let _ = writeln!(s, "{}", mesh.faces().len());
    for f in mesh.faces() {
        let [a, b, c] = f.vertices;
        let _ = writeln!(s, "{a} {b} {c} {}", f.weight);
    }
    s
}

pub fn save_mesh(path: impl AsRef<Path>, mesh: &WeightedMesh) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, write_mesh(mesh)).map_err(|e| io_err(path, e))
}

#[derive(Serialize, Deserialize)]
struct MapFile {
    format: String,
    mesh: String,
    map: SpMap,
}

const MAP_FORMAT: &str = "wrp-sssp 1";

/// The map file carries its mesh so queries can re-trace bundles without the original file.
pub fn save_map(path: impl AsRef<Path>, mesh: &WeightedMesh, map: &SpMap) -> Result<(), FormatError> {
    let path = path.as_ref();
    let f = MapFile { format: MAP_FORMAT.into(), mesh: write_mesh(mesh), map: map.clone() };
    let text = serde_json::to_string(&f).map_err(|e| FormatError::CorruptMap(e.to_string()))?;
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn load_map(path: impl AsRef<Path>) -> Result<(WeightedMesh, SpMap), FormatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let f: MapFile = serde_json::from_str(&text).map_err(|e| FormatError::CorruptMap(e.to_string()))?;
    if f.format != MAP_FORMAT {
        return Err(FormatError::CorruptMap(format!("unknown format '{}'", f.format)));
    }
    let mesh = parse_mesh(&f.mesh).map_err(|e| FormatError::CorruptMap(e.to_string()))?;
    check_map(&mesh, &f.map)?;
    Ok((mesh, f.map))
}

/// Index sanity so a hand-edited map cannot panic the query code.
fn check_map(mesh: &WeightedMesh, map: &SpMap) -> Result<(), FormatError> {
    let bad = |m: &str| Err(FormatError::CorruptMap(m.into()));
    let (nv, nf, ne) = (mesh.vertices().len(), mesh.faces().len(), mesh.edges().len());
    if map.dist.len() != nv || map.pred.len() != nv || map.source >= nv {
        return bad("vertex tables do not match the mesh");
    }
    for s in &map.snapshots {
        if s.edge >= ne || s.face >= nf || s.faces.iter().any(|&f| f >= nf) || s.edges.iter().any(|&e| e >= ne) {
            return bad("snapshot refers to missing mesh elements");
        }
        if s.faces.is_empty() || s.edges.len() + 1 != s.faces.len() || s.spans.is_empty() {
            return bad("malformed snapshot");
        }
        if s.spans.iter().any(|sp| sp.source >= map.sources.len() || sp.start >= s.faces.len()) {
            return bad("snapshot refers to missing sources");
        }
    }
    for g in &map.envelope {
        if g.pieces.iter().any(|p| p.snapshot >= map.snapshots.len()) {
            return bad("envelope refers to missing snapshots");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE: &str = "WRP 1\n# a comment\n3\n0 0\n4 0\n0 3 # trailing\n1\n0 1 2 2\n";

    #[test]
    fn parse_single() {
        let m = parse_mesh(SINGLE).unwrap();
        assert_eq!(m.faces().len(), 1);
        assert_eq!(m.edges().len(), 3);
        assert!(m.edges().iter().all(|e| e.weight == 2.0));
    }

    #[test]
    fn repeated_index_is_degenerate() {
        let e = parse_mesh("WRP 1\n3\n0 0\n1 0\n0 1\n1\n0 0 1 1\n").unwrap_err();
        assert!(e.to_string().contains("degenerate triangle"), "{e}");
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse_mesh("WRP 2\n"), Err(FormatError::Parse { line: 1, .. })));
        assert!(matches!(parse_mesh("WRP 1\n3\n0 0\n1 x\n"), Err(FormatError::Parse { line: 4, .. })));
        assert!(matches!(parse_mesh("WRP 1\n3\n0 0\n1 0\n0 1\n2\n0 1 2 1\n"), Err(FormatError::Parse { .. })));
    }

    #[test]
    fn round_trip_is_exact() {
        let m = WeightedMesh::new(
            vec![Point2::new(0.1, 0.0), Point2::new(1.0 / 3.0, 1e-17), Point2::new(0.0, 2.0f64.sqrt())],
            vec![([0, 1, 2], 0.7)],
        )
        .unwrap();
        let again = parse_mesh(&write_mesh(&m)).unwrap();
        assert_eq!(again.vertices(), m.vertices());
        assert_eq!(again.faces()[0].weight.to_bits(), 0.7f64.to_bits());
        assert_eq!(write_mesh(&again), write_mesh(&m));
    }
}
