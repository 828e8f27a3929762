//! Space, function, point and subset inputs.
//!
//! Space files are JSON objects tagged by `"type"`:
//!
//! ```json
//! {"type": "cone", "theta": "3pi/2"}
//! {"type": "polygon", "vertices": [[0,0],[1,0],[1,1],[0,1]]}
//! {"type": "mesh", "vertices": [[..],..], "faces": [[0,1,2],..]}
//! {"type": "doubled", "base": {"type": "cap", "r0": 1.0}}
//! ```
//!
//! Function files hold one function object or a list of them, tagged by
//! `"kind"`. Points inside function files are point literals.

use std::fmt;
use std::path::Path;

use alexgeo_core::concavity_tight::{build_strictly_concave, BuildOptions};
use alexgeo_core::extremal::Subset;
use alexgeo_core::spaces::Mesh;
use alexgeo_core::{Expr, GeoError, Point, Space};
use serde::de::{self, Deserializer};
use serde::Deserialize;

use crate::angle::parse_angle;

/// A failure to read user input, located in a file when possible.
#[derive(Debug)]
pub struct InputError {
    pub source: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{}:{}: {}", self.source, l, c, self.message),
            (Some(l), None) => write!(f, "{}:{}: {}", self.source, l, self.message),
            _ => write!(f, "{}: {}", self.source, self.message),
        }
    }
}

impl std::error::Error for InputError {}

impl InputError {
    pub fn flag(flag: &str, message: impl Into<String>) -> Self {
        InputError { source: format!("--{flag}"), line: None, column: None, message: message.into() }
    }

    pub fn json(source: &str, e: serde_json::Error) -> Self {
        let full = e.to_string();
        let message = match full.rfind(" at line ") {
            Some(i) => full[..i].to_string(),
            None => full,
        };
        InputError { source: source.into(), line: Some(e.line()), column: Some(e.column()), message }
    }

    /// Locates the first occurrence of `"key"` in `text`.
    fn at_key(source: &str, text: &str, key: &str, message: impl Into<String>) -> Self {
        let needle = format!("\"{key}\"");
        let (line, column) = match text.find(&needle) {
            Some(at) => {
                let before = &text[..at];
                let line = before.matches('\n').count() + 1;
                let column = at - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                (Some(line), Some(column))
            }
            None => (Some(1), Some(1)),
        };
        InputError { source: source.into(), line, column, message: message.into() }
    }
}

/// A number or an angle literal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(pub f64);

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Angle(v)),
            Raw::Text(s) => parse_angle(&s).map(Angle).map_err(de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceSpec {
    Cone { theta: Angle },
    Spindle { theta: Angle },
    Polygon { vertices: Vec<[f64; 2]> },
    Cap { r0: Angle },
    Mesh {
        #[serde(default)]
        vertices: Option<Vec<[f64; 3]>>,
        faces: Vec<[usize; 3]>,
        #[serde(default)]
        edge_lengths: Option<Vec<[f64; 3]>>,
        #[serde(default)]
        depth: Option<usize>,
    },
    Doubled { base: Box<SpaceSpec> },
}

impl SpaceSpec {
    /// Key whose line is reported when building fails.
    fn key(&self) -> &'static str {
        match self {
            SpaceSpec::Cone { .. } | SpaceSpec::Spindle { .. } => "theta",
            SpaceSpec::Polygon { .. } => "vertices",
            SpaceSpec::Cap { .. } => "r0",
            SpaceSpec::Mesh { .. } => "faces",
            SpaceSpec::Doubled { .. } => "base",
        }
    }

    pub fn build(&self) -> Result<Space, GeoError> {
        match self {
            SpaceSpec::Cone { theta } => Space::cone(theta.0),
            SpaceSpec::Spindle { theta } => Space::spindle(theta.0),
            SpaceSpec::Polygon { vertices } => Space::polygon(vertices.clone()),
            SpaceSpec::Cap { r0 } => Space::cap(r0.0),
            SpaceSpec::Mesh { vertices, faces, edge_lengths, depth } => {
                let mesh = match (vertices, edge_lengths) {
                    (Some(v), None) => Mesh::from_coords(v, faces)?,
                    (None, Some(l)) => Mesh::from_edge_lengths(faces, l)?,
                    _ => {
                        return Err(GeoError::InvalidSpace(
                            "a mesh needs exactly one of \"vertices\" and \"edge_lengths\"".into(),
                        ))
                    }
                };
                Ok(Space::Mesh(match depth {
                    Some(d) => mesh.with_depth(*d),
                    None => mesh,
                }))
            }
            SpaceSpec::Doubled { base } => base.build()?.build_doubling(),
        }
    }
}

fn read(path: &Path) -> Result<(String, String), InputError> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError { source: source.clone(), line: None, column: None, message: e.to_string() })?;
    Ok((source, text))
}

pub fn parse_space(source: &str, text: &str) -> Result<Space, InputError> {
    let desc: SpaceSpec = serde_json::from_str(text).map_err(|e| InputError::json(source, e))?;
    desc.build().map_err(|e| InputError::at_key(source, text, desc.key(), e.to_string()))
}

pub fn load_space(path: &Path) -> Result<Space, InputError> {
    let (source, text) = read(path)?;
    parse_space(&source, &text)
}

/// Reads a point literal for `space`.
///
/// Cones, spindles and caps take `r,phi`; polygons `x,y`; meshes
/// `F<face>:b1,b2` (barycentric, `b0 = 1 − b1 − b2`) or `V<vertex>`;
/// doubled caps `S<sheet>:r,phi`.
pub fn parse_point(space: &Space, s: &str) -> Result<Point, String> {
    let t = s.trim();
    let pair = |body: &str| -> Result<(f64, f64), String> {
        let (a, b) = body.split_once(',').ok_or_else(|| format!("point {s:?} needs two comma-separated numbers"))?;
        Ok((parse_angle(a)?, parse_angle(b)?))
    };
    let p = match space {
        Space::Cone(_) | Space::Spindle(_) | Space::Cap(_) => {
            let (r, phi) = pair(t)?;
            Point::Polar { r, phi }
        }
        Space::Polygon(_) => {
            let (x, y) = pair(t)?;
            Point::Plane { x, y }
        }
        Space::Mesh(m) => {
            if let Some(v) = t.strip_prefix('V') {
                let v: usize = v.parse().map_err(|_| format!("bad vertex index in {s:?}"))?;
                if v >= m.n_vertices() {
                    return Err(format!("vertex {v} out of range"));
                }
                m.vertex_point(v)
            } else {
                let body = t.strip_prefix('F').ok_or_else(|| format!("mesh points look like F0:0.2,0.3 or V1, got {s:?}"))?;
                let (face, rest) = body.split_once(':').ok_or_else(|| format!("missing ':' in {s:?}"))?;
                let face: usize = face.parse().map_err(|_| format!("bad face index in {s:?}"))?;
                let (b1, b2) = pair(rest)?;
                Point::Mesh { face, bary: [1.0 - b1 - b2, b1, b2] }
            }
        }
        Space::DoubledCap(_) => {
            let body = t.strip_prefix('S').ok_or_else(|| format!("doubled-cap points look like S0:r,phi, got {s:?}"))?;
            let (sheet, rest) = body.split_once(':').ok_or_else(|| format!("missing ':' in {s:?}"))?;
            let sheet: u8 = sheet.parse().map_err(|_| format!("bad sheet in {s:?}"))?;
            let (r, phi) = pair(rest)?;
            Point::Sheet { sheet, r, phi }
        }
    };
    space.check_point(&p).map_err(|e| e.to_string())
}

/// Reads `p1;p2;...`.
pub fn parse_points(space: &Space, s: &str) -> Result<Vec<Point>, String> {
    s.split(';').filter(|x| !x.trim().is_empty()).map(|x| parse_point(space, x)).collect()
}

/// Reads `empty`, `whole`, `boundary`, `point:<p>`, `path:<p1>;<p2>;...`
/// and unions joined by `|`.
pub fn parse_subset(space: &Space, s: &str) -> Result<Subset, String> {
    let parts: Vec<&str> = s.split('|').collect();
    if parts.len() > 1 {
        return parts.iter().map(|p| parse_subset(space, p)).collect::<Result<_, _>>().map(Subset::Union);
    }
    let t = s.trim();
    match t {
        "empty" => Ok(Subset::Empty),
        "whole" => Ok(Subset::Whole),
        "boundary" => Ok(Subset::Boundary),
        _ => {
            if let Some(p) = t.strip_prefix("point:") {
                Ok(Subset::Point(parse_point(space, p)?))
            } else if let Some(p) = t.strip_prefix("path:") {
                Ok(Subset::EdgePath(parse_points(space, p)?))
            } else {
                Err(format!("unknown subset {s:?}"))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum FuncSpec {
    Dist { q: String },
    DistSq { q: String },
    RhoDist { kappa: f64, q: String },
    PhiRc { r: f64, c: f64, q: String },
    Affine {
        weights: Vec<f64>,
        #[serde(default)]
        constant: f64,
        terms: Vec<FuncSpec>,
    },
    Sum { terms: Vec<FuncSpec> },
    Scaled { w: f64, term: Box<FuncSpec> },
    Min { terms: Vec<FuncSpec> },
    Theta { inner: Box<FuncSpec> },
    DistBoundary,
    SigmaBoundary { kappa: f64 },
    MeanDist { points: Vec<String> },
    StrictlyConcave {
        p: String,
        r: f64,
        c: f64,
        n: usize,
        #[serde(default)]
        offset: Option<Angle>,
    },
}

impl FuncSpec {
    fn build(&self, space: &Space) -> Result<Expr, String> {
        let pt = |s: &String| parse_point(space, s);
        let all = |v: &Vec<FuncSpec>| v.iter().map(|f| f.build(space)).collect::<Result<Vec<_>, _>>();
        Ok(match self {
            FuncSpec::Dist { q } => Expr::Dist(pt(q)?),
            FuncSpec::DistSq { q } => Expr::DistSq(pt(q)?),
            FuncSpec::RhoDist { kappa, q } => Expr::RhoDist { kappa: *kappa, q: pt(q)? },
            FuncSpec::PhiRc { r, c, q } => Expr::PhiRc { r: *r, c: *c, q: pt(q)? },
            FuncSpec::Affine { weights, constant, terms } => {
                Expr::Affine { weights: weights.clone(), constant: *constant, terms: all(terms)? }
            }
            FuncSpec::Sum { terms } => Expr::sum(all(terms)?),
            FuncSpec::Scaled { w, term } => Expr::scaled(*w, term.build(space)?),
            FuncSpec::Min { terms } => Expr::Min(all(terms)?),
            FuncSpec::Theta { inner } => Expr::theta(inner.build(space)?).map_err(|e| e.to_string())?,
            FuncSpec::DistBoundary => Expr::DistBoundary,
            FuncSpec::SigmaBoundary { kappa } => Expr::SigmaBoundary { kappa: *kappa },
            FuncSpec::MeanDist { points } => Expr::MeanDist(points.iter().map(pt).collect::<Result<_, _>>()?),
            FuncSpec::StrictlyConcave { p, r, c, n, offset } => {
                let opts = BuildOptions { offset: offset.map_or(0.0, |a| a.0), ..Default::default() };
                build_strictly_concave(space, &pt(p)?, *r, *c, *n, &opts).map_err(|e| e.to_string())?.expr
            }
        })
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<FuncSpec>),
    One(FuncSpec),
}

/// Parses a function file into one or more validated expressions.
pub fn parse_functions(space: &Space, source: &str, text: &str) -> Result<Vec<Expr>, InputError> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| InputError::json(source, e))?;
    let specs = match serde_json::from_value::<OneOrMany>(raw.clone()) {
        Ok(OneOrMany::Many(v)) => v,
        Ok(OneOrMany::One(f)) => vec![f],
        Err(_) => {
            // Re-run the strict parser on the text to get a located message.
            let e = match raw {
                serde_json::Value::Array(_) => serde_json::from_str::<Vec<FuncSpec>>(text).err(),
                _ => serde_json::from_str::<FuncSpec>(text).err(),
            };
            return Err(match e {
                Some(e) => InputError::json(source, e),
                None => InputError { source: source.into(), line: Some(1), column: Some(1), message: "unreadable function".into() },
            });
        }
    };
    let mut out = Vec::new();
    for f in &specs {
        let e = f.build(space).map_err(|m| InputError::at_key(source, text, "kind", m))?;
        e.validate(space).map_err(|err| InputError::at_key(source, text, "kind", err.to_string()))?;
        out.push(e);
    }
    if out.is_empty() {
        return Err(InputError { source: source.into(), line: Some(1), column: Some(1), message: "no functions".into() });
    }
    Ok(out)
}

pub fn load_functions(space: &Space, path: &Path) -> Result<Vec<Expr>, InputError> {
    let (source, text) = read(path)?;
    parse_functions(space, &source, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_error_has_location() {
        let e = parse_space("s.json", "{\n  \"type\": \"cone\",\n  \"theta\": }").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.to_string().starts_with("s.json:3:"));
    }

    #[test]
    fn validation_error_points_at_key() {
        let e = parse_space("s.json", "{\"type\": \"cone\",\n \"theta\": 7.0}").unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn angle_literals_in_files() {
        let s = parse_space("s.json", r#"{"type": "cone", "theta": "3pi/2"}"#).unwrap();
        let p = parse_point(&s, "1,0").unwrap();
        let q = parse_point(&s, "1,5pi/4").unwrap();
        assert!((s.distance(&p, &q) - 0.7653668647301798).abs() < 1e-12);
    }

    #[test]
    fn mesh_and_sheet_points() {
        let s = parse_space(
            "t.json",
            r#"{"type":"mesh","vertices":[[1,1,1],[1,-1,-1],[-1,1,-1],[-1,-1,1]],"faces":[[0,1,2],[0,3,1],[0,2,3],[1,3,2]]}"#,
        )
        .unwrap();
        assert!(matches!(parse_point(&s, "F0:0.2,0.3").unwrap(), Point::Mesh { face: 0, .. }));
        assert!(parse_point(&s, "V3").is_ok());
        assert!(parse_point(&s, "V4").is_err());
        let d = parse_space("d.json", r#"{"type":"doubled","base":{"type":"cap","r0":1}}"#).unwrap();
        assert!(parse_point(&d, "S1:0.5,pi").is_ok());
    }

    #[test]
    fn function_list() {
        let s = Space::cone(std::f64::consts::TAU).unwrap();
        let fs = parse_functions(
            &s,
            "f.json",
            r#"[{"kind":"dist","q":"1,0"},{"kind":"scaled","w":-0.5,"term":{"kind":"dist_sq","q":"0,0"}}]"#,
        )
        .unwrap();
        assert_eq!(fs.len(), 2);
        let e = parse_functions(&s, "f.json", "{\"kind\": \"dist\",\n \"q\": \"1\"}").unwrap_err();
        assert_eq!(e.line, Some(1));
    }

    #[test]
    fn subsets() {
        let s = Space::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_eq!(parse_subset(&s, "boundary").unwrap(), Subset::Boundary);
        assert!(matches!(parse_subset(&s, "path:0,0;1,0").unwrap(), Subset::EdgePath(v) if v.len() == 2));
        assert!(matches!(parse_subset(&s, "point:0,0|boundary").unwrap(), Subset::Union(_)));
    }
}
