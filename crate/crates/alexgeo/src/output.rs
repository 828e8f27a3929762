//! CSV, SVG and JSON artifacts.

use std::fmt::Write as _;

use alexgeo_core::flow::{CurveEvent, CurveRecord};
use alexgeo_core::model_plane::DevelopmentRecord;
use alexgeo_core::Point;
use serde_json::{json, Value};

pub const SCHEMA: &str = "alexgeo/1";
pub const SVG_WIDTH: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Json,
}

/// Wraps a payload with the schema tag and command name.
pub fn envelope(command: &str, mut payload: Value) -> Value {
    let mut doc = json!({ "schema": SCHEMA, "command": command });
    if let (Some(d), Some(p)) = (doc.as_object_mut(), payload.as_object_mut()) {
        d.append(p);
    }
    doc
}

fn point_columns(p: &Point) -> (&'static str, Vec<String>) {
    match *p {
        Point::Polar { r, phi } => ("r,phi", vec![num(r), num(phi)]),
        Point::Plane { x, y } => ("x,y", vec![num(x), num(y)]),
        Point::Mesh { face, bary } => ("face,b0,b1,b2", vec![face.to_string(), num(bary[0]), num(bary[1]), num(bary[2])]),
        Point::Sheet { sheet, r, phi } => ("sheet,r,phi", vec![sheet.to_string(), num(r), num(phi)]),
    }
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn point_string(p: &Point) -> String {
    match *p {
        Point::Polar { r, phi } => format!("{r:.6},{phi:.6}"),
        Point::Plane { x, y } => format!("{x:.6},{y:.6}"),
        Point::Mesh { face, bary } => format!("F{face}:{:.6},{:.6}", bary[1], bary[2]),
        Point::Sheet { sheet, r, phi } => format!("S{sheet}:{r:.6},{phi:.6}"),
    }
}

fn event_at(curve: &CurveRecord, i: usize) -> &'static str {
    for e in &curve.events {
        let (idx, name) = match e {
            CurveEvent::Vertex { index, .. } => (*index, "vertex"),
            CurveEvent::Boundary { index, .. } => (*index, "boundary"),
            CurveEvent::Stop { index, .. } => (*index, "stop"),
            CurveEvent::Truncated { index, .. } => (*index, "truncated"),
        };
        if idx == i {
            return name;
        }
    }
    ""
}

/// One row per sample: `t`, native coordinates, event.
pub fn curve_csv(curve: &CurveRecord) -> String {
    let header = curve.points.first().map_or("x,y", |p| point_columns(p).0);
    let mut out = format!("t,{header},event\n");
    for (i, (t, p)) in curve.t.iter().zip(&curve.points).enumerate() {
        let _ = writeln!(out, "{},{},{}", num(*t), point_columns(p).1.join(","), event_at(curve, i));
    }
    out
}

pub fn development_csv(dev: &DevelopmentRecord) -> String {
    let mut out = String::from("t,r,phi,turn\n");
    for (s, turn) in dev.samples.iter().zip(&dev.turns) {
        let turn = turn.map_or(String::new(), num);
        let _ = writeln!(out, "{},{},{},{}", num(s.t), num(s.r), num(s.phi), turn);
    }
    out
}

pub fn rows_csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| num(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// A 1000 px wide plot of polylines and marker points in a common frame.
pub struct Svg {
    title: String,
    lines: Vec<(Vec<[f64; 2]>, &'static str)>,
    dots: Vec<([f64; 2], &'static str)>,
}

impl Svg {
    pub fn new(title: impl Into<String>) -> Self {
        Svg { title: title.into(), lines: Vec::new(), dots: Vec::new() }
    }

    pub fn line(&mut self, pts: Vec<[f64; 2]>, color: &'static str) -> &mut Self {
        self.lines.push((pts, color));
        self
    }

    pub fn dot(&mut self, at: [f64; 2], color: &'static str) -> &mut Self {
        self.dots.push((at, color));
        self
    }

    pub fn render(&self) -> String {
        let all = self.lines.iter().flat_map(|l| l.0.iter()).chain(self.dots.iter().map(|d| &d.0));
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in all.filter(|p| p[0].is_finite() && p[1].is_finite()) {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if !lo[0].is_finite() {
            lo = [-1.0, -1.0];
            hi = [1.0, 1.0];
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        let margin = 40.0;
        let scale = (SVG_WIDTH - 2.0 * margin) / span;
        let height = ((hi[1] - lo[1]) * scale + 2.0 * margin).max(200.0).round();
        let map = |p: &[f64; 2]| [margin + (p[0] - lo[0]) * scale, height - margin - (p[1] - lo[1]) * scale];

        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{height}\" viewBox=\"0 0 {SVG_WIDTH} {height}\">"
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let _ = writeln!(s, "<text x=\"{margin}\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{}</text>", escape(&self.title));
        for (pts, color) in &self.lines {
            let coords: Vec<String> = pts
                .iter()
                .filter(|p| p[0].is_finite() && p[1].is_finite())
                .map(|p| {
                    let q = map(p);
                    format!("{:.2},{:.2}", q[0], q[1])
                })
                .collect();
            let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>", coords.join(" "));
        }
        for (p, color) in &self.dots {
            let q = map(p);
            let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>", q[0], q[1]);
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Polar-to-Cartesian picture of a development around its base point.
pub fn development_svg(dev: &DevelopmentRecord, title: &str) -> String {
    let pts: Vec<[f64; 2]> = dev.samples.iter().map(|s| [s.r * s.phi.cos(), s.r * s.phi.sin()]).collect();
    let mut svg = Svg::new(title);
    svg.line(pts, "steelblue").dot([0.0, 0.0], "crimson");
    svg.render()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alexgeo_core::model_plane::develop_curve;

    #[test]
    fn envelope_has_schema() {
        let v = envelope("distance", json!({"distance": 1.0}));
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["distance"], 1.0);
    }

    #[test]
    fn svg_is_1000_wide() {
        let dev = develop_curve(0.0, &[(0.0, 1.0), (0.5, 0.8), (1.0, 1.0)], 1e-9).unwrap();
        let s = development_svg(&dev, "a < b");
        assert!(s.contains("width=\"1000\""));
        assert!(s.contains("a &lt; b"));
    }
}
