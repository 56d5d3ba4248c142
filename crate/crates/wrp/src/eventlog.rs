//! Line-delimited event log: one `key=value` record per popped event.

use std::io::Write;

use wrp_core::wavefront::{EventKind, EventRecord, Observer};
use wrp_core::Point2;

pub fn kind_name(k: EventKind) -> &'static str {
    match k {
        EventKind::SiblingStrike => "sibling_strike",
        EventKind::VertexStrike => "vertex_strike",
    }
}

pub fn format_record(r: &EventRecord) -> String {
    let mut s = format!("seq={} key={} kind={}", r.seq, r.key, kind_name(r.kind));
    if let Some(b) = r.bundle {
        s += &format!(" bundle={b}");
    }
    if let Some(v) = r.vertex {
        s += &format!(" vertex={v}");
    }
    if let Some(e) = r.edge {
        s += &format!(" edge={e}");
    }
    for (i, p) in r.points.iter().enumerate() {
        if let Some(p) = p {
            s += &format!(" p{i}={},{}", p.x, p.y);
        }
    }
    s
}

/// Writes records as they arrive; remembers the first write error.
pub struct EventLog<W: Write> {
    out: W,
    pub error: Option<std::io::Error>,
    pub count: usize,
}

impl<W: Write> EventLog<W> {
    pub fn new(out: W) -> Self {
        EventLog { out, error: None, count: 0 }
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> Observer for EventLog<W> {
    fn event(&mut self, rec: &EventRecord) {
        self.count += 1;
        if self.error.is_none() {
            if let Err(e) = writeln!(self.out, "{}", format_record(rec)) {
                self.error = Some(e);
            }
        }
    }
}

/// Parsed back for overlays and tests; unknown keys are ignored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoggedEvent {
    pub seq: u64,
    pub key: f64,
    pub kind: String,
    pub bundle: Option<usize>,
    pub vertex: Option<usize>,
    pub edge: Option<usize>,
    pub points: Vec<Point2>,
}

pub fn parse_line(line: &str) -> Option<LoggedEvent> {
    let mut ev = LoggedEvent::default();
    for tok in line.split_whitespace() {
        let (k, v) = tok.split_once('=')?;
        match k {
            "seq" => ev.seq = v.parse().ok()?,
            "key" => ev.key = v.parse().ok()?,
            "kind" => ev.kind = v.to_string(),
            "bundle" => ev.bundle = Some(v.parse().ok()?),
            "vertex" => ev.vertex = Some(v.parse().ok()?),
            "edge" => ev.edge = Some(v.parse().ok()?),
            "p0" | "p1" => {
                let (x, y) = v.split_once(',')?;
                ev.points.push(Point2::new(x.parse().ok()?, y.parse().ok()?));
            }
            _ => {}
        }
    }
    (!ev.kind.is_empty()).then_some(ev)
}

pub fn parse_log(text: &str) -> Vec<LoggedEvent> {
    text.lines().filter_map(parse_line).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip() {
        let r = EventRecord {
            seq: 4,
            key: 1.25,
            kind: EventKind::SiblingStrike,
            bundle: Some(2),
            vertex: None,
            edge: Some(7),
            points: [Some(Point2::new(0.5, 1.0)), Some(Point2::new(-1.0, 0.1))],
        };
        let ev = parse_line(&format_record(&r)).unwrap();
        assert_eq!(ev.seq, 4);
        assert_eq!(ev.kind, "sibling_strike");
        assert_eq!(ev.edge, Some(7));
        assert_eq!(ev.points, vec![Point2::new(0.5, 1.0), Point2::new(-1.0, 0.1)]);
    }
}
