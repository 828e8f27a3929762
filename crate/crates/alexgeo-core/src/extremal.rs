//! Extremal subsets: detection on the supported spaces, the critical-point
//! criterion and gradient-flow invariance.
//!
//! A subset `E` is extremal when every semiconcave gradient flow preserves it.
//! Equivalently, whenever `p ∈ E` is a local minimum of `dist_q` restricted to
//! `E` for some `q ∉ E`, the point `p` is critical for `dist_q`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeoError, Result};
use crate::flow::{gradient_curve_with, FlowOptions};
use crate::functions::{check_concavity, concavity_excess, Ball, ConcavityOptions, Expr};
use crate::quasigeodesic::{check_quasigeodesic, geodesic_path, QgCheckOptions};
use crate::report::Report;
use crate::spaces::{Point, Space};
use crate::tangent::gradient;

/// A finite union of points, boundary components and edge paths.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Subset {
    Empty,
    Whole,
    Point(Point),
    /// The whole boundary of a polygon or cap.
    Boundary,
    /// A broken line through polygon points, traversed along straight segments.
    EdgePath(Vec<Point>),
    Union(Vec<Subset>),
}

fn plane(p: &Point) -> Option<[f64; 2]> {
    match *p {
        Point::Plane { x, y } => Some([x, y]),
        _ => None,
    }
}

fn seg_param(a: [f64; 2], b: [f64; 2], x: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    if l2 == 0.0 {
        return 0.0;
    }
    ((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / l2
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn pt(x: [f64; 2]) -> Point {
    Point::Plane { x: x[0], y: x[1] }
}

/// Local minima of `|qx|` over the broken line through `nodes`.
fn path_feet(nodes: &[[f64; 2]], closed: bool, q: [f64; 2]) -> Vec<[f64; 2]> {
    let n = nodes.len();
    let segs = if closed { n } else { n.saturating_sub(1) };
    let mut feet = Vec::new();
    for i in 0..segs {
        let (a, b) = (nodes[i], nodes[(i + 1) % n]);
        let t = seg_param(a, b, q);
        if t > 0.0 && t < 1.0 {
            feet.push(lerp(a, b, t));
        }
    }
    for i in 0..n {
        let out_ok = if closed || i + 1 < n { seg_param(nodes[i], nodes[(i + 1) % n], q) <= 0.0 } else { true };
        let in_ok = if closed || i > 0 { seg_param(nodes[(i + n - 1) % n], nodes[i], q) >= 1.0 } else { true };
        if out_ok && in_ok && n > 1 {
            feet.push(nodes[i]);
        }
    }
    if n == 1 {
        feet.push(nodes[0]);
    }
    feet
}

fn path_distance(nodes: &[[f64; 2]], closed: bool, x: [f64; 2]) -> f64 {
    let n = nodes.len();
    let segs = if closed { n } else { n.saturating_sub(1) };
    let mut d = if n == 1 { (x[0] - nodes[0][0]).hypot(x[1] - nodes[0][1]) } else { f64::INFINITY };
    for i in 0..segs {
        let (a, b) = (nodes[i], nodes[(i + 1) % n]);
        let y = lerp(a, b, seg_param(a, b, x).clamp(0.0, 1.0));
        d = d.min((x[0] - y[0]).hypot(x[1] - y[1]));
    }
    d
}

fn edge_nodes(space: &Space, nodes: &[Point]) -> Result<Vec<[f64; 2]>> {
    if !matches!(space, Space::Polygon(_)) {
        return Err(GeoError::Unsupported("edge paths are supported in polygons only".into()));
    }
    nodes
        .iter()
        .map(|p| plane(&space.check_point(p)?).ok_or_else(|| GeoError::InvalidPoint("edge path node".into())))
        .collect()
}

impl Subset {
    pub fn validate(&self, space: &Space) -> Result<()> {
        match self {
            Subset::Point(p) => space.check_point(p).map(|_| ()),
            Subset::Boundary if !space.has_boundary() => {
                Err(GeoError::Unsupported(alloc::format!("a {} has no boundary", space.name())))
            }
            Subset::EdgePath(nodes) if nodes.is_empty() => Err(GeoError::Domain("empty edge path".into())),
            Subset::EdgePath(nodes) => edge_nodes(space, nodes).map(|_| ()),
            Subset::Union(parts) => parts.iter().try_for_each(|s| s.validate(space)),
            _ => Ok(()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Subset::Empty => "empty set".into(),
            Subset::Whole => "whole space".into(),
            Subset::Point(p) => alloc::format!("point {p:?}"),
            Subset::Boundary => "boundary".into(),
            Subset::EdgePath(n) => alloc::format!("edge path through {} nodes", n.len()),
            Subset::Union(parts) => {
                let names: Vec<String> = parts.iter().map(|s| s.describe()).collect();
                names.join(" ∪ ")
            }
        }
    }

    /// Distance from `x` to the subset (infinite for the empty set).
    pub fn distance(&self, space: &Space, x: &Point) -> f64 {
        match self {
            Subset::Empty => f64::INFINITY,
            Subset::Whole => 0.0,
            Subset::Point(p) => space.distance(p, x),
            Subset::Boundary => space.boundary_feet(x).map_or(f64::INFINITY, |b| b.0),
            Subset::EdgePath(nodes) => match (edge_nodes(space, nodes), plane(x)) {
                (Ok(n), Some(y)) => path_distance(&n, false, y),
                _ => f64::NAN,
            },
            Subset::Union(parts) => parts.iter().map(|s| s.distance(space, x)).fold(f64::INFINITY, f64::min),
        }
    }

    /// `dist_E` as an expression, where one exists.
    pub fn as_expr(&self) -> Option<Expr> {
        match self {
            Subset::Point(p) => Some(Expr::Dist(*p)),
            Subset::Boundary => Some(Expr::DistBoundary),
            Subset::Union(parts) => {
                let terms: Option<Vec<Expr>> = parts.iter().map(|s| s.as_expr()).collect();
                terms.map(Expr::Min)
            }
            _ => None,
        }
    }

    /// Points of the subset at which `dist_q|E` has a local minimum.
    pub fn feet(&self, space: &Space, q: &Point) -> Vec<Point> {
        match (self, space) {
            (Subset::Point(p), _) => vec![*p],
            (Subset::Boundary, Space::Polygon(g)) => match plane(q) {
                Some(y) => path_feet(&g.vertices, true, y).into_iter().map(pt).collect(),
                None => Vec::new(),
            },
            (Subset::Boundary, Space::Cap(c)) => match *q {
                Point::Polar { r, phi } if r > 1e-12 => vec![Point::Polar { r: c.r0, phi }],
                Point::Polar { .. } => {
                    (0..4).map(|k| Point::Polar { r: c.r0, phi: k as f64 * FRAC_PI_2 }).collect()
                }
                _ => Vec::new(),
            },
            (Subset::EdgePath(nodes), _) => match (edge_nodes(space, nodes), plane(q)) {
                (Ok(n), Some(y)) => path_feet(&n, false, y).into_iter().map(pt).collect(),
                _ => Vec::new(),
            },
            (Subset::Union(parts), _) => parts.iter().flat_map(|s| s.feet(space, q)).collect(),
            _ => Vec::new(),
        }
    }

    /// A random point of the subset.
    pub fn sample<R: Rng + ?Sized>(&self, space: &Space, rng: &mut R) -> Option<Point> {
        match (self, space) {
            (Subset::Empty, _) => None,
            (Subset::Whole, _) => Some(space.sample_point(rng)),
            (Subset::Point(p), _) => Some(*p),
            (Subset::Boundary, Space::Polygon(g)) => {
                let i = rng.gen_range(0..g.len());
                let t = rng.gen::<f64>();
                Some(pt(lerp(g.vertices[i], g.vertices[(i + 1) % g.len()], t)))
            }
            (Subset::Boundary, Space::Cap(c)) => Some(Point::Polar { r: c.r0, phi: rng.gen_range(0.0..TAU) }),
            (Subset::Boundary, _) => None,
            (Subset::EdgePath(nodes), _) => {
                let n = edge_nodes(space, nodes).ok()?;
                if n.len() == 1 {
                    return Some(pt(n[0]));
                }
                let i = rng.gen_range(0..n.len() - 1);
                Some(pt(lerp(n[i], n[i + 1], rng.gen::<f64>())))
            }
            (Subset::Union(parts), _) => {
                if parts.is_empty() {
                    return None;
                }
                parts[rng.gen_range(0..parts.len())].sample(space, rng)
            }
        }
    }
}

/// Settings for [`verify_extremal`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalOptions {
    /// Number of probe points `q` and of flows per function family.
    pub n_funcs: usize,
    pub n_steps: usize,
    pub h: f64,
    /// Bound on `|∇_p dist_q|` at foot points.
    pub tol_criterion: f64,
    /// Allowed drift per unit time.
    pub tol_flow: f64,
    pub seed: u64,
}

impl Default for ExtremalOptions {
    fn default() -> Self {
        ExtremalOptions { n_funcs: 20, n_steps: 200, h: 1e-2, tol_criterion: 1e-8, tol_flow: 1e-6, seed: 0 }
    }
}

fn sample_off<R: Rng + ?Sized>(space: &Space, subset: &Subset, rng: &mut R) -> Option<Point> {
    (0..1000).map(|_| space.sample_point(rng)).find(|q| subset.distance(space, q) > 1e-3)
}

/// Runs the critical-point criterion and the flow-invariance test.
///
/// Metrics: `max_foot_gradient`, `max_drift`, `drift_per_time`, `feet`,
/// `flows`.
pub fn verify_extremal(space: &Space, subset: &Subset, opts: &ExtremalOptions) -> Result<Report> {
    subset.validate(space)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rep = Report::new("extremal", 0.0);

    let mut worst_grad = 0.0f64;
    let mut n_feet = 0usize;
    let mut crit = Report::new("criterion", opts.tol_criterion);
    for _ in 0..opts.n_funcs {
        let Some(q) = sample_off(space, subset, &mut rng) else { break };
        let f = Expr::Dist(q);
        for p in subset.feet(space, &q) {
            let g = gradient(&f, space, &p)?;
            n_feet += 1;
            worst_grad = worst_grad.max(g.norm);
            crit.margin(opts.tol_criterion - g.norm);
        }
    }
    if n_feet == 0 {
        rep.note("criterion vacuous: no probe off the subset has a foot point");
    }
    rep.metric("max_foot_gradient", worst_grad);
    rep.metric("feet", n_feet as f64);

    let duration = opts.n_steps as f64 * opts.h;
    let mut flow = Report::new("flow invariance", 0.0);
    let mut worst_drift = 0.0f64;
    let mut flows = 0usize;
    let mut fopts = FlowOptions::new(opts.h);
    fopts.verify = false;
    for k in 0..opts.n_funcs {
        let Some(x) = subset.sample(space, &mut rng) else { break };
        let q = space.sample_point(&mut rng);
        let f = if k % 2 == 0 { Expr::scaled(0.5, Expr::DistSq(q)) } else { Expr::Dist(q) };
        let curve = gradient_curve_with(&f, space, &x, duration, &fopts)?;
        flows += 1;
        for y in &curve.points {
            let d = subset.distance(space, y);
            worst_drift = worst_drift.max(d);
        }
    }
    let budget = duration * opts.tol_flow;
    flow.tolerance = budget;
    flow.margin(budget - worst_drift);
    rep.metric("max_drift", worst_drift);
    rep.metric("drift_per_time", if duration > 0.0 { worst_drift / duration } else { 0.0 });
    rep.metric("flows", flows as f64);

    rep.samples = crit.samples + flow.samples;
    rep.worst_margin = crit.worst_margin.min(flow.worst_margin);
    if !crit.passed {
        rep.fail(alloc::format!("gradient at a foot point reached {worst_grad:.3e}"));
    }
    if !flow.passed {
        rep.fail(alloc::format!("a flow drifted {worst_drift:.3e} from the subset"));
    }
    Ok(rep)
}

/// A candidate extremal subset with its verification report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Candidate {
    pub subset: Subset,
    pub reason: String,
    pub evidence: Report,
}

/// Enumerates the extremal candidates of a space and verifies each one.
pub fn detect_extremal(space: &Space, opts: &ExtremalOptions) -> Result<Vec<Candidate>> {
    let mut found: Vec<(Subset, String)> = vec![(Subset::Empty, "always extremal".into())];
    match space {
        Space::Polygon(g) => {
            found.push((Subset::Boundary, "boundary of a convex polygon".into()));
            for i in 0..g.len() {
                let a = g.interior_angle(i);
                if a <= FRAC_PI_2 + 1e-12 {
                    let v = g.vertices[i];
                    found.push((Subset::Point(pt(v)), alloc::format!("corner {i} with angle {a:.6} ≤ π/2")));
                }
            }
        }
        Space::Cap(_) => found.push((Subset::Boundary, "boundary circle of a cap".into())),
        _ => {
            for (p, a) in space.cone_points() {
                if a <= PI + 1e-12 {
                    found.push((Subset::Point(p), alloc::format!("cone point with angle {a:.6} ≤ π")));
                }
            }
        }
    }
    found.push((Subset::Whole, "always extremal".into()));
    let mut out = Vec::new();
    for (subset, reason) in found {
        let evidence = verify_extremal(space, &subset, opts)?;
        out.push(Candidate { subset, reason, evidence });
    }
    Ok(out)
}

/// Samples `|∇_x dist_E|` on `0 < dist_E < eps0`.
///
/// Metrics: `gradient_floor` (the smallest norm seen), `eps0`.
pub fn gradient_floor(space: &Space, subset: &Subset, eps0: f64, n: usize, seed: u64) -> Result<Report> {
    let f = subset
        .as_expr()
        .ok_or_else(|| GeoError::Unsupported(alloc::format!("no distance expression for {}", subset.describe())))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = Report::new("gradient floor", 0.0);
    let mut floor = f64::INFINITY;
    let mut tries = 0;
    while rep.samples < n && tries < n * 2000 {
        tries += 1;
        let x = match (subset, space) {
            (Subset::Point(p), _) => {
                let dir = rng.gen::<f64>() * space.sigma(p).len;
                space.trace(p, dir, eps0 * rng.gen::<f64>()).1.end
            }
            (Subset::Boundary, Space::Cap(c)) => {
                Point::Polar { r: c.r0 - eps0.min(c.r0) * rng.gen::<f64>(), phi: rng.gen_range(0.0..TAU) }
            }
            _ => space.sample_point(&mut rng),
        };
        let d = subset.distance(space, &x);
        if !(d > 1e-9 && d < eps0) {
            continue;
        }
        let g = gradient(&f, space, &x)?;
        floor = floor.min(g.norm);
        rep.margin(g.norm);
    }
    rep.metric("gradient_floor", floor);
    rep.metric("eps0", eps0);
    if rep.samples < n {
        rep.note(alloc::format!("only {} samples found within {eps0}", rep.samples));
    }
    rep.passed = floor > 0.0;
    Ok(rep)
}

/// Traverses an edge path of a polygon and runs the quasigeodesic checker.
pub fn lieberman_check(space: &Space, nodes: &[Point], h: f64, opts: &QgCheckOptions) -> Result<Report> {
    edge_nodes(space, nodes)?;
    let curve = geodesic_path(space, nodes, h)?;
    let mut rep = check_quasigeodesic(space, &curve, opts);
    rep.check = "lieberman".into();
    Ok(rep)
}

/// Concavity of the boundary distance: `dist_∂` is concave in a polygon and
/// `sin(r₀ − r)` satisfies `f″ ≤ −f` in a cap. Metrics: `perimeter` for caps.
pub fn boundary_concavity(space: &Space, n_chords: usize, tol: f64, seed: u64) -> Result<Report> {
    match space {
        Space::Polygon(g) => {
            let (lo, hi) = g.bounding_box();
            let c = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
            let region = Ball { center: pt(c), radius: (hi[0] - lo[0]).hypot(hi[1] - lo[1]) };
            let opts = ConcavityOptions { n_geodesics: n_chords, n_samples: 40, tol, seed };
            let mut rep = check_concavity(&Expr::DistBoundary, space, 0.0, &region, &opts);
            rep.check = "boundary concavity".into();
            Ok(rep)
        }
        Space::Cap(c) => {
            let f = Expr::SigmaBoundary { kappa: 1.0 };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rep = Report::new("boundary concavity", tol);
            while rep.samples < n_chords {
                let p = space.sample_point(&mut rng);
                let q = space.sample_point(&mut rng);
                if space.distance(&p, &q) < 1e-3 {
                    continue;
                }
                let vals: Vec<(f64, f64)> =
                    space.geodesic(&p, &q, 40).iter().map(|(t, x)| (*t, f.eval(space, x))).collect();
                rep.margin(-concavity_excess(&vals, 1.0, 0.0));
            }
            let perimeter = TAU * c.r0.sin();
            rep.metric("perimeter", perimeter);
            if perimeter > TAU {
                rep.fail("cap perimeter exceeds 2π");
            }
            Ok(rep)
        }
        _ => Err(GeoError::Unsupported(alloc::format!("a {} has no boundary", space.name()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Space {
        Space::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    fn quick() -> ExtremalOptions {
        ExtremalOptions { n_funcs: 8, n_steps: 50, ..Default::default() }
    }

    #[test]
    fn square_boundary_and_corners() {
        let s = square();
        let c = detect_extremal(&s, &quick()).unwrap();
        let corners = c.iter().filter(|c| matches!(c.subset, Subset::Point(_))).count();
        assert_eq!(corners, 4);
        for cand in &c {
            assert!(cand.evidence.passed, "{}: {:?}", cand.subset.describe(), cand.evidence);
        }
        let b = c.iter().find(|c| c.subset == Subset::Boundary).unwrap();
        assert!(b.evidence.get("max_foot_gradient").unwrap() < 1e-8);
        assert!(b.evidence.get("drift_per_time").unwrap() < 1e-6);
    }

    #[test]
    fn narrow_cone_apex_but_not_plane() {
        let narrow = Space::cone(FRAC_PI_2).unwrap();
        let c = detect_extremal(&narrow, &quick()).unwrap();
        assert!(c.iter().any(|c| matches!(c.subset, Subset::Point(_)) && c.evidence.passed));
        let plane = Space::cone(TAU).unwrap();
        let c = detect_extremal(&plane, &quick()).unwrap();
        assert!(c.iter().all(|c| matches!(c.subset, Subset::Empty | Subset::Whole)));
    }

    #[test]
    fn wide_apex_fails_criterion() {
        let s = Space::cone(1.5 * PI).unwrap();
        let r = verify_extremal(&s, &Subset::Point(Point::Polar { r: 0.0, phi: 0.0 }), &quick()).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn segment_midpoint_is_not_extremal() {
        let s = Space::cone(TAU).unwrap();
        let r = verify_extremal(&s, &Subset::Point(Point::Polar { r: 1.0, phi: 0.3 }), &quick()).unwrap();
        assert!(!r.passed);
        assert!(r.get("max_foot_gradient").unwrap() > 0.99);
    }

    #[test]
    fn cap_boundary_is_invariant() {
        let s = Space::cap(1.0).unwrap();
        let r = verify_extremal(&s, &Subset::Boundary, &quick()).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn floor_near_boundary() {
        let r = gradient_floor(&square(), &Subset::Boundary, 0.1, 200, 1).unwrap();
        assert!((r.get("gradient_floor").unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lieberman_on_square() {
        let nodes: Vec<Point> = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]].iter().map(|v| pt(*v)).collect();
        let r = lieberman_check(&square(), &nodes, 0.01, &QgCheckOptions::default()).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn boundary_concavity_cases() {
        let r = boundary_concavity(&square(), 200, 1e-9, 0).unwrap();
        assert!(r.passed, "{r:?}");
        let r = boundary_concavity(&Space::cap(1.2).unwrap(), 100, 1e-8, 0).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.get("perimeter").unwrap() <= TAU);
    }
}
