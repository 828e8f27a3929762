//! Subcommands and their dispatch.

use std::path::{Path, PathBuf};

use alexgeo_core::concavity_tight::{tight_check, tight_image_study, TightImageOptions};
use alexgeo_core::extremal::{detect_extremal, verify_extremal, ExtremalOptions};
use alexgeo_core::flow::{gradient_curve, CurveRecord};
use alexgeo_core::functions::{check_concavity, Ball, ConcavityOptions, InfConvolution};
use alexgeo_core::model_plane::{develop_curve, DevelopmentRecord};
use alexgeo_core::quasigeodesic::{check_quasigeodesic, entropy, geodesic_path, trace_quasigeodesic, QgCheckOptions};
use alexgeo_core::radial::radial_curve;
use alexgeo_core::tangent::gradient;
use alexgeo_core::{Expr, GeoError, Point, Report, Space};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::angle::parse_angle;
use crate::input::{load_functions, load_space, parse_point, parse_points, parse_subset, InputError};
use crate::output::{self, envelope, Format, Svg};
use crate::suite;

#[derive(Debug, Parser)]
#[command(name = "alexgeo", version, about = "Computational toolkit for two-dimensional Alexandrov spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s)
}

#[derive(Debug, Args)]
pub struct Out {
    /// Artifact format; scalar commands print plain text when omitted.
    #[arg(long, value_enum)]
    pub out: Option<Format>,
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpaceArg {
    /// Space description (JSON).
    #[arg(long)]
    pub space: PathBuf,
}

#[derive(Debug, Args)]
pub struct CurveSource {
    /// Curve JSON written by `geodesic`, `flow`, `gexp` or `trace-qg`.
    #[arg(long, conflicts_with = "nodes")]
    pub curve: Option<PathBuf>,
    /// Broken geodesic through `p1;p2;...`.
    #[arg(long)]
    pub nodes: Option<String>,
    #[arg(long, default_value_t = 1e-2)]
    pub step: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance between two points.
    Distance {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[command(flatten)]
        out: Out,
    },
    /// Minimizing geodesic between two points.
    Geodesic {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[arg(long)]
        base: Option<String>,
        #[command(flatten)]
        out: Out,
    },
    /// Gradient of a function at a point.
    Gradient {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        p: String,
        #[command(flatten)]
        out: Out,
    },
    /// Gradient curve of a function.
    Flow {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        p: String,
        /// Flow time.
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long)]
        base: Option<String>,
        #[command(flatten)]
        out: Out,
    },
    /// Gradient exponential along a radial curve.
    Gexp {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        p: String,
        #[arg(long, value_parser = angle, allow_hyphen_values = true)]
        dir: f64,
        /// Norm of the tangent vector.
        #[arg(long)]
        length: f64,
        /// Curvature of the comparison model; defaults to the space's bound.
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long)]
        base: Option<String>,
        #[command(flatten)]
        out: Out,
    },
    /// Quasigeodesic trace with equal-split continuation.
    TraceQg {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        from: String,
        #[arg(long, value_parser = angle, allow_hyphen_values = true)]
        dir: f64,
        #[arg(long)]
        length: f64,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        /// Also run the quasigeodesic checker.
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 20)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        base: Option<String>,
        #[command(flatten)]
        out: Out,
    },
    /// Quasigeodesic checker on a stored curve or a broken geodesic.
    CheckQg {
        #[command(flatten)]
        space: SpaceArg,
        #[command(flatten)]
        source: CurveSource,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 20)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// κ-development of a curve around a base point.
    Develop {
        #[command(flatten)]
        space: SpaceArg,
        #[command(flatten)]
        source: CurveSource,
        #[arg(long)]
        base: String,
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        out: Out,
    },
    /// λ-concavity along random chords of a ball.
    CheckConcavity {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        function: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        center: String,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 100)]
        chords: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Inf-convolution f_ε at one or more points.
    InfConv {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        eps: f64,
        /// `p1;p2;...`
        #[arg(long)]
        p: String,
        #[command(flatten)]
        out: Out,
    },
    /// Lists and verifies the extremal subsets of a space.
    DetectExtremal {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long, default_value_t = 20)]
        funcs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Critical-point and flow-invariance tests for one subset.
    VerifyExtremal {
        #[command(flatten)]
        space: SpaceArg,
        /// `empty`, `whole`, `boundary`, `point:<p>`, `path:<p1>;<p2>`; join with `|`.
        #[arg(long)]
        subset: String,
        #[arg(long, default_value_t = 20)]
        funcs: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Tightness sup d f_i(∇f_j) over a ball.
    TightCheck {
        #[command(flatten)]
        space: SpaceArg,
        /// A list of functions.
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        center: String,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Image of concave coordinates over a convex polygonal domain.
    TightImage {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        function: PathBuf,
        /// Counter-clockwise domain vertices `x,y;x,y;...`; the whole polygon when absent.
        #[arg(long, allow_hyphen_values = true)]
        domain: Option<String>,
        #[arg(long, default_value_t = 40)]
        grid: usize,
        #[arg(long, default_value_t = 1000)]
        support: usize,
        #[arg(long, default_value_t = 200)]
        critical: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Runs the acceptance criteria and prints a ledger.
    Suite {
        /// Smaller sample counts.
        #[arg(long)]
        quick: bool,
        /// Exit 1 when a criterion fails.
        #[arg(long)]
        strict: bool,
        /// Criterion numbers to run, e.g. `--only 1,5`.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[command(flatten)]
        out: Out,
    },
}

/// Failure of a command, mapped to an exit status.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Input(#[from] InputError),
    #[error("{0}")]
    Geo(#[from] GeoError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Geo(GeoError::Invariant(_)) => 1,
            _ => 2,
        }
    }
}

/// What a successful command reports back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Done,
    Breach,
}

type Outcome = Result<Verdict, Failure>;

fn point(space: &Space, flag: &str, s: &str) -> Result<Point, Failure> {
    parse_point(space, s).map_err(|m| InputError::flag(flag, m).into())
}

fn points(space: &Space, flag: &str, s: &str) -> Result<Vec<Point>, Failure> {
    parse_points(space, s).map_err(|m| InputError::flag(flag, m).into())
}

fn one_function(space: &Space, path: &Path) -> Result<Expr, Failure> {
    let mut fs = load_functions(space, path)?;
    if fs.len() != 1 {
        return Err(Failure::Usage(format!("{} holds {} functions; expected one", path.display(), fs.len())));
    }
    Ok(fs.remove(0))
}

fn write(out: &Out, text: &str) -> Result<(), Failure> {
    match &out.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn write_json(out: &Out, v: &Value) -> Result<(), Failure> {
    write(out, &(serde_json::to_string_pretty(v).expect("json") + "\n"))
}

/// Default base point for development pictures.
fn default_base(space: &Space) -> Point {
    match space {
        Space::Polygon(g) => {
            let n = g.vertices.len() as f64;
            let c = g.vertices.iter().fold([0.0, 0.0], |a, v| [a[0] + v[0] / n, a[1] + v[1] / n]);
            Point::Plane { x: c[0], y: c[1] }
        }
        Space::Mesh(m) => m.vertex_point(0),
        Space::DoubledCap(_) => Point::Sheet { sheet: 0, r: 0.0, phi: 0.0 },
        _ => Point::Polar { r: 0.0, phi: 0.0 },
    }
}

fn develop(space: &Space, curve: &CurveRecord, base: &Point, kappa: f64, tol: f64) -> Result<DevelopmentRecord, Failure> {
    let prof: Vec<(f64, f64)> = curve.t.iter().zip(&curve.points).map(|(t, x)| (*t, space.distance(base, x))).collect();
    Ok(develop_curve(kappa, &prof, tol)?)
}

fn emit_curve(
    command: &str,
    space: &Space,
    curve: &CurveRecord,
    base: &Option<String>,
    out: &Out,
    extra: Value,
) -> Result<(), Failure> {
    match out.out.unwrap_or(Format::Json) {
        Format::Csv => write(out, &output::curve_csv(curve)),
        Format::Svg => {
            let b = match base {
                Some(s) => point(space, "base", s)?,
                None => default_base(space),
            };
            let dev = develop(space, curve, &b, space.kappa(), 1e-6)?;
            let title = format!("{command} on {}: development around {}", space.name(), output::point_string(&b));
            write(out, &output::development_svg(&dev, &title))
        }
        Format::Json => {
            let mut payload = json!({ "space": space.name(), "curve": curve });
            if let (Some(p), Value::Object(mut e)) = (payload.as_object_mut(), extra) {
                p.append(&mut e);
            }
            write_json(out, &envelope(command, payload))
        }
    }
}

fn report_text(r: &Report) -> String {
    let mut s = format!(
        "{}: {} (worst margin {:.3e}, tolerance {:.1e}, {} samples)\n",
        r.check,
        if r.passed { "PASS" } else { "FAIL" },
        r.worst_margin,
        r.tolerance,
        r.samples
    );
    for (k, v) in &r.metrics {
        s.push_str(&format!("  {k} = {v:.6e}\n"));
    }
    for n in &r.notes {
        s.push_str(&format!("  note: {n}\n"));
    }
    s
}

fn emit_report(command: &str, r: &Report, out: &Out) -> Outcome {
    match out.out {
        Some(Format::Json) => write_json(out, &envelope(command, json!({ "report": r })))?,
        Some(Format::Csv) => {
            let mut s = String::from("metric,value\n");
            s.push_str(&format!("passed,{}\nworst_margin,{:e}\nsamples,{}\n", r.passed as u8, r.worst_margin, r.samples));
            for (k, v) in &r.metrics {
                s.push_str(&format!("{k},{v:e}\n"));
            }
            write(out, &s)?
        }
        Some(Format::Svg) => return Err(Failure::Usage(format!("{command} has no SVG artifact"))),
        None => write(out, &report_text(r))?,
    }
    Ok(if r.passed { Verdict::Done } else { Verdict::Breach })
}

fn load_curve(space: &Space, src: &CurveSource) -> Result<CurveRecord, Failure> {
    match (&src.curve, &src.nodes) {
        (Some(path), _) => {
            let source = path.display().to_string();
            let text = std::fs::read_to_string(path)
                .map_err(|e| InputError { source: source.clone(), line: None, column: None, message: e.to_string() })?;
            let v: Value = serde_json::from_str(&text).map_err(|e| InputError::json(&source, e))?;
            let c = v.get("curve").cloned().unwrap_or(v);
            let curve: CurveRecord = serde_json::from_value(c).map_err(|e| InputError {
                source: source.clone(),
                line: None,
                column: None,
                message: format!("not a curve: {e}"),
            })?;
            for p in &curve.points {
                space.check_point(p).map_err(|e| InputError { source: source.clone(), line: None, column: None, message: e.to_string() })?;
            }
            Ok(curve)
        }
        (None, Some(nodes)) => Ok(geodesic_path(space, &points(space, "nodes", nodes)?, src.step)?),
        (None, None) => Err(Failure::Usage("give --curve FILE or --nodes \"p1;p2;...\"".into())),
    }
}

fn qg_options(tol: f64, probes: usize, seed: u64) -> QgCheckOptions {
    QgCheckOptions { n_probes: probes, tol, seed, ..Default::default() }
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Distance { space, p, q, out } => {
            let s = load_space(&space.space)?;
            let (p, q) = (point(&s, "p", &p)?, point(&s, "q", &q)?);
            let d = s.distance(&p, &q);
            match out.out {
                Some(Format::Json) => {
                    let dirs = s.directions_to(&p, &q);
                    write_json(&out, &envelope("distance", json!({ "space": s.name(), "distance": d, "directions": dirs })))?
                }
                Some(Format::Csv) => write(&out, &format!("distance\n{d:.12e}\n"))?,
                Some(Format::Svg) => return Err(Failure::Usage("distance has no SVG artifact".into())),
                None => write(&out, &format!("{d:.6}\n"))?,
            }
            Ok(Verdict::Done)
        }
        Command::Geodesic { space, p, q, step, base, out } => {
            let s = load_space(&space.space)?;
            let nodes = [point(&s, "p", &p)?, point(&s, "q", &q)?];
            let c = geodesic_path(&s, &nodes, step)?;
            emit_curve("geodesic", &s, &c, &base, &out, json!({ "length": s.distance(&nodes[0], &nodes[1]) }))?;
            Ok(Verdict::Done)
        }
        Command::Gradient { space, function, p, out } => {
            let s = load_space(&space.space)?;
            let f = one_function(&s, &function)?;
            let p = point(&s, "p", &p)?;
            let g = gradient(&f, &s, &p)?;
            match out.out {
                Some(Format::Json) => write_json(
                    &out,
                    &envelope("gradient", json!({ "value": f.eval(&s, &p), "gradient": g })),
                )?,
                Some(Format::Csv) => write(&out, &format!("norm,angle\n{:.12e},{:.12e}\n", g.norm, g.angle))?,
                Some(Format::Svg) => return Err(Failure::Usage("gradient has no SVG artifact".into())),
                None => write(&out, &format!("norm {:.6} angle {:.6}\n", g.norm, g.angle))?,
            }
            Ok(Verdict::Done)
        }
        Command::Flow { space, function, p, length, step, base, out } => {
            let s = load_space(&space.space)?;
            let f = one_function(&s, &function)?;
            let c = gradient_curve(&f, &s, &point(&s, "p", &p)?, length, step)?;
            emit_curve("flow", &s, &c, &base, &out, json!({ "end": c.end() }))?;
            Ok(Verdict::Done)
        }
        Command::Gexp { space, p, dir, length, kappa, step, base, out } => {
            let s = load_space(&space.space)?;
            let p = point(&s, "p", &p)?;
            let kappa = kappa.unwrap_or_else(|| s.kappa());
            let c = radial_curve(&s, &p, dir, kappa, length, step)?;
            emit_curve("gexp", &s, &c, &base, &out, json!({ "kappa": kappa, "end": c.end() }))?;
            Ok(Verdict::Done)
        }
        Command::TraceQg { space, from, dir, length, step, check, tol, probes, seed, base, out } => {
            let s = load_space(&space.space)?;
            let c = trace_quasigeodesic(&s, &point(&s, "from", &from)?, dir, length, step)?;
            let report = check.then(|| check_quasigeodesic(&s, &c, &qg_options(tol, probes, seed)));
            let ent = entropy(&c)?;
            let fmt = out.out.unwrap_or(Format::Json);
            let extra = json!({ "entropy": ent.total, "check": report });
            emit_curve("trace-qg", &s, &c, &base, &out, extra)?;
            if let Some(r) = &report {
                if fmt != Format::Json {
                    let doc = serde_json::to_string_pretty(&envelope("check-qg", json!({ "report": r }))).expect("json");
                    if out.output.is_some() {
                        println!("{doc}");
                    } else {
                        eprintln!("{doc}");
                    }
                }
                if !r.passed {
                    return Ok(Verdict::Breach);
                }
            }
            Ok(Verdict::Done)
        }
        Command::CheckQg { space, source, tol, probes, seed, out } => {
            let s = load_space(&space.space)?;
            let c = load_curve(&s, &source)?;
            let r = check_quasigeodesic(&s, &c, &qg_options(tol, probes, seed));
            emit_report("check-qg", &r, &out)
        }
        Command::Develop { space, source, base, kappa, tol, out } => {
            let s = load_space(&space.space)?;
            let c = load_curve(&s, &source)?;
            let b = point(&s, "base", &base)?;
            let dev = develop(&s, &c, &b, kappa.unwrap_or_else(|| s.kappa()), tol)?;
            match out.out.unwrap_or(Format::Json) {
                Format::Csv => write(&out, &output::development_csv(&dev))?,
                Format::Svg => {
                    let title = format!("development around {} (min turn {:.3e})", output::point_string(&b), dev.min_turn());
                    write(&out, &output::development_svg(&dev, &title))?
                }
                Format::Json => write_json(&out, &envelope("develop", json!({ "development": dev, "min_turn": dev.min_turn() })))?,
            }
            Ok(Verdict::Done)
        }
        Command::CheckConcavity { space, function, lambda, center, radius, chords, tol, seed, out } => {
            let s = load_space(&space.space)?;
            let f = one_function(&s, &function)?;
            let region = Ball { center: point(&s, "center", &center)?, radius };
            let opts = ConcavityOptions { n_geodesics: chords, tol, seed, ..Default::default() };
            let r = check_concavity(&f, &s, lambda, &region, &opts);
            emit_report("check-concavity", &r, &out)
        }
        Command::InfConv { space, function, eps, p, out } => {
            let s = load_space(&space.space)?;
            let f = one_function(&s, &function)?;
            let ic = InfConvolution::new(&f, &s, eps)?;
            let ys = points(&s, "p", &p)?;
            let vals: Vec<_> = ys.iter().map(|y| ic.eval(y)).collect();
            match out.out {
                Some(Format::Json) => {
                    let rows: Vec<Value> = ys
                        .iter()
                        .zip(&vals)
                        .map(|(y, v)| json!({ "y": y, "value": v.value, "argmin": v.argmin, "in_domain": v.in_domain }))
                        .collect();
                    write_json(&out, &envelope("inf-conv", json!({ "eps": eps, "values": rows })))?
                }
                Some(Format::Csv) => {
                    let mut t = String::from("y,value,argmin,in_domain\n");
                    for (y, v) in ys.iter().zip(&vals) {
                        t.push_str(&format!(
                            "\"{}\",{:.12e},\"{}\",{}\n",
                            output::point_string(y),
                            v.value,
                            output::point_string(&v.argmin),
                            v.in_domain
                        ));
                    }
                    write(&out, &t)?
                }
                Some(Format::Svg) => return Err(Failure::Usage("inf-conv has no SVG artifact".into())),
                None => {
                    let mut t = String::new();
                    for v in &vals {
                        t.push_str(&format!("{:.6} at {}\n", v.value, output::point_string(&v.argmin)));
                    }
                    write(&out, &t)?
                }
            }
            Ok(Verdict::Done)
        }
        Command::DetectExtremal { space, funcs, seed, out } => {
            let s = load_space(&space.space)?;
            let opts = ExtremalOptions { n_funcs: funcs, seed, ..Default::default() };
            let cands = detect_extremal(&s, &opts)?;
            let ok = cands.iter().all(|c| c.evidence.passed);
            match out.out {
                Some(Format::Json) => {
                    let list: Vec<Value> = cands
                        .iter()
                        .map(|c| json!({ "subset": c.subset, "description": c.subset.describe(), "reason": c.reason, "evidence": c.evidence }))
                        .collect();
                    write_json(&out, &envelope("detect-extremal", json!({ "space": s.name(), "candidates": list })))?
                }
                Some(Format::Svg) | Some(Format::Csv) => {
                    return Err(Failure::Usage("detect-extremal writes text or JSON".into()))
                }
                None => {
                    let mut t = String::new();
                    for c in &cands {
                        t.push_str(&format!(
                            "{} {}: {}\n",
                            if c.evidence.passed { "PASS" } else { "FAIL" },
                            c.subset.describe(),
                            c.reason
                        ));
                    }
                    write(&out, &t)?
                }
            }
            Ok(if ok { Verdict::Done } else { Verdict::Breach })
        }
        Command::VerifyExtremal { space, subset, funcs, tol, seed, out } => {
            let s = load_space(&space.space)?;
            let sub = parse_subset(&s, &subset).map_err(|m| InputError::flag("subset", m))?;
            let opts = ExtremalOptions { n_funcs: funcs, tol_flow: tol, seed, ..Default::default() };
            let r = verify_extremal(&s, &sub, &opts)?;
            emit_report("verify-extremal", &r, &out)
        }
        Command::TightCheck { space, function, center, radius, samples, seed, out } => {
            let s = load_space(&space.space)?;
            let fs = load_functions(&s, &function)?;
            let region = Ball { center: point(&s, "center", &center)?, radius };
            let r = tight_check(&s, &fs, &region, samples, seed)?;
            emit_report("tight-check", &r, &out)
        }
        Command::TightImage { space, function, domain, grid, support, critical, seed, out } => {
            let s = load_space(&space.space)?;
            let fs = load_functions(&s, &function)?;
            let domain = match domain {
                Some(d) => Some(
                    points(&s, "domain", &d)?
                        .into_iter()
                        .map(|p| match p {
                            Point::Plane { x, y } => Ok([x, y]),
                            _ => Err(Failure::Usage("the domain must be planar".into())),
                        })
                        .collect::<Result<Vec<_>, _>>()?,
                ),
                None => None,
            };
            let opts = TightImageOptions { domain, grid, n_support: support, n_critical: critical, seed, ..Default::default() };
            let img = tight_image_study(&s, &fs, &opts)?;
            match out.out {
                Some(Format::Csv) => {
                    let mut header = vec!["x".to_string(), "y".to_string()];
                    header.extend((0..fs.len()).map(|i| format!("f{i}")));
                    write(&out, &output::rows_csv(&header, &img.cloud))?
                }
                Some(Format::Svg) => {
                    let mut svg = Svg::new(format!("image of {} coordinates (f0, f1)", fs.len()));
                    for row in &img.cloud {
                        svg.dot([row[2], row[3]], "steelblue");
                    }
                    write(&out, &svg.render())?
                }
                Some(Format::Json) => write_json(
                    &out,
                    &envelope("tight-image", json!({ "report": img.report, "critical": img.critical, "cloud": img.cloud })),
                )?,
                None => write(&out, &report_text(&img.report))?,
            }
            Ok(if img.report.passed { Verdict::Done } else { Verdict::Breach })
        }
        Command::Suite { quick, strict, only, out } => {
            let ids: Vec<u8> = if only.is_empty() { (1..=11).collect() } else { only };
            if let Some(bad) = ids.iter().find(|&&i| !(1..=11).contains(&i)) {
                return Err(Failure::Usage(format!("no criterion {bad}; choose from 1 to 11")));
            }
            let results: Vec<suite::CriterionResult> = ids.iter().map(|&i| suite::run_criterion(i, quick)).collect();
            let passed = results.iter().filter(|r| r.passed).count();
            match out.out {
                Some(Format::Json) => write_json(
                    &out,
                    &envelope("suite", json!({ "quick": quick, "passed": passed, "total": results.len(), "criteria": results })),
                )?,
                Some(Format::Csv) => {
                    let mut t = String::from("id,name,passed,seconds\n");
                    for r in &results {
                        t.push_str(&format!("{},{},{},{:.3}\n", r.id, r.name, r.passed, r.seconds));
                    }
                    write(&out, &t)?
                }
                Some(Format::Svg) => return Err(Failure::Usage("suite writes text, CSV or JSON".into())),
                None => {
                    let mut t: String = results.iter().map(|r| r.line() + "\n").collect();
                    t.push_str(&format!("{passed}/{} criteria passed\n", results.len()));
                    write(&out, &t)?
                }
            }
            Ok(if strict && passed < results.len() { Verdict::Breach } else { Verdict::Done })
        }
    }
}
