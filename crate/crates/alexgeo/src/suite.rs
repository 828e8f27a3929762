//! The eleven acceptance criteria.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::Instant;

use alexgeo_core::concavity_tight::{build_strictly_concave, tight_check, tight_image_study, BuildOptions, TightImageOptions};
use alexgeo_core::extremal::{detect_extremal, lieberman_check, boundary_concavity, ExtremalOptions, Subset};
use alexgeo_core::flow::{convergence_orders, gradient_curve};
use alexgeo_core::functions::{Ball, InfConvolution};
use alexgeo_core::model_plane::{comparison_angle, model_side};
use alexgeo_core::quasigeodesic::{build_prequasigeodesic, check_quasigeodesic, entropy, trace_quasigeodesic, QgCheckOptions};
use alexgeo_core::radial::{gexp_map, shortness_defects, tangent_cone_metric, verify_radial_comparison};
use alexgeo_core::spaces::Mesh;
use alexgeo_core::tangent::{milka_polar, polar_check};
use alexgeo_core::{Expr, Point, Sigma, Space, TangentVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Outcome of one criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub metrics: Vec<(String, f64)>,
    pub seconds: f64,
}

impl CriterionResult {
    /// One line: `C05 PASS quasigeodesic suite: ...`.
    pub fn line(&self) -> String {
        format!(
            "C{:02} {} {}: {} ({:.1}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.summary,
            self.seconds
        )
    }
}

pub const NAMES: [&str; 11] = [
    "model-plane round trip",
    "gradient-flow contraction",
    "gexp shortness",
    "radial comparison",
    "quasigeodesic suite",
    "boundary concavity",
    "Milka polarity",
    "extremal invariance and Lieberman",
    "inf-convolution oracle",
    "tight maps",
    "pre-quasigeodesic entropy decay",
];

struct Acc {
    passed: bool,
    notes: Vec<String>,
    metrics: Vec<(String, f64)>,
}

impl Acc {
    fn new() -> Self {
        Acc { passed: true, notes: Vec::new(), metrics: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.passed = false;
            self.notes.push(what.into());
        }
    }

    fn metric(&mut self, name: impl Into<String>, v: f64) {
        self.metrics.push((name.into(), v));
    }
}

type Run = Result<Acc, alexgeo_core::GeoError>;

/// Runs criterion `id` (1 to 11). `quick` shrinks sample counts.
pub fn run_criterion(id: u8, quick: bool) -> CriterionResult {
    let start = Instant::now();
    let out = match id {
        1 => c1(quick),
        2 => c2(),
        3 => c3(quick),
        4 => c4(quick),
        5 => c5(quick),
        6 => c6(quick),
        7 => c7(),
        8 => c8(quick),
        9 => c9(quick),
        10 => c10(quick),
        11 => c11(),
        _ => panic!("no criterion {id}"),
    };
    let seconds = start.elapsed().as_secs_f64();
    let name = NAMES[id as usize - 1];
    match out {
        Ok(acc) => {
            let mut summary: Vec<String> =
                acc.metrics.iter().map(|(k, v)| format!("{k}={v:.3e}")).collect();
            summary.extend(acc.notes.iter().cloned());
            CriterionResult { id, name, passed: acc.passed, summary: summary.join(", "), metrics: acc.metrics, seconds }
        }
        Err(e) => CriterionResult { id, name, passed: false, summary: format!("error: {e}"), metrics: Vec::new(), seconds },
    }
}

pub fn run_all(quick: bool) -> Vec<CriterionResult> {
    (1..=11).map(|i| run_criterion(i, quick)).collect()
}

fn c1(quick: bool) -> Run {
    let mut acc = Acc::new();
    let n = if quick { 200 } else { 1000 };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in [-1.0, 0.0, 1.0] {
        let mut worst = 0.0f64;
        for _ in 0..n {
            let a = rng.gen_range(0.05..1.5);
            let c = rng.gen_range(0.05..1.5);
            let beta = rng.gen_range(0.05..PI - 0.05);
            let b = model_side(k, a, c, beta)?;
            worst = worst.max((comparison_angle(k, a, b, c)? - beta).abs());
        }
        acc.metric(format!("max_err_k{k}"), worst);
        acc.check(worst < 1e-9, format!("κ={k} error {worst:.3e}"));
    }
    Ok(acc)
}

fn c2() -> Run {
    let mut acc = Acc::new();
    let s = Space::cone(TAU)?;
    let f = Expr::scaled(-0.5, Expr::DistSq(Point::Polar { r: 0.0, phi: 0.0 }));
    let p = Point::Polar { r: 1.0, phi: 0.3 };
    let q = Point::Polar { r: 0.6, phi: 2.1 };
    let exact = (-1f64).exp() * s.distance(&p, &q);
    let mut errs = Vec::new();
    for h in [4e-3, 2e-3, 1e-3] {
        let a = gradient_curve(&f, &s, &p, 1.0, h)?.end();
        let b = gradient_curve(&f, &s, &q, 1.0, h)?.end();
        errs.push((s.distance(&a, &b) - exact).abs());
    }
    let orders = convergence_orders(&errs);
    acc.metric("err_h1e-3", errs[2]);
    acc.metric("min_order", orders.iter().cloned().fold(f64::INFINITY, f64::min));
    acc.check(errs[2] < 1e-2, "error at h=1e-3 too large");
    acc.check(orders.iter().all(|&o| o >= 1.0), format!("orders {orders:?}"));
    Ok(acc)
}

fn c3(quick: bool) -> Run {
    let mut acc = Acc::new();
    let n = if quick { 60 } else { 500 };
    let h = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for theta in [FRAC_PI_2, PI, 1.5 * PI, TAU] {
        let s = Space::cone(theta)?;
        let p = Point::Polar { r: 1.0, phi: 0.0 };
        let sig = s.sigma(&p);
        let pairs: Vec<(TangentVec, TangentVec)> = (0..n)
            .map(|_| {
                let u = TangentVec::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..sig.len), sig);
                let v = TangentVec::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..sig.len), sig);
                (u, v)
            })
            .collect();
        let worst = shortness_defects(&s, &p, &pairs, 0.0, h)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
        acc.metric(format!("defect_theta{theta:.3}"), worst);
        acc.check(worst <= 1e-3, format!("θ={theta:.3} defect {worst:.3e}"));

        let o = Point::Polar { r: 0.0, phi: 0.0 };
        let so = s.sigma(&o);
        let mut apex = 0.0f64;
        for _ in 0..n.min(100) {
            let u = TangentVec::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..so.len), so);
            let v = TangentVec::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..so.len), so);
            let d = s.distance(&gexp_map(&s, &o, &u, 0.0, h)?, &gexp_map(&s, &o, &v, 0.0, h)?);
            apex = apex.max((d - tangent_cone_metric(0.0, &u, &v)?).abs());
        }
        acc.check(apex < 1e-9, format!("θ={theta:.3} apex deviation {apex:.3e}"));
        acc.metric(format!("apex_theta{theta:.3}"), apex);
    }
    Ok(acc)
}

/// A regular tetrahedron with unit edges.
pub fn regular_tetrahedron() -> Space {
    let s = 1.0 / 8f64.sqrt();
    let v = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
    Space::Mesh(Mesh::from_coords(&v, &TETRA_FACES).expect("regular tetrahedron"))
}

pub const TETRA_FACES: [[usize; 3]; 4] = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];

fn c4(quick: bool) -> Run {
    let mut acc = Acc::new();
    let n = if quick { 8 } else { 50 };
    let h = 1e-3;
    let tol = 1e-6 + 10.0 * h;
    let grid = |t_max: f64| -> Vec<f64> { (1..=200).map(|k| t_max * k as f64 / 200.0).collect() };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cases: Vec<(&str, Space, f64, f64)> = vec![
        ("cone", Space::cone(1.5 * PI)?, 0.0, 1.5),
        ("tetra", regular_tetrahedron(), 0.0, 0.6),
        ("spindle", Space::spindle(PI)?, 1.0, FRAC_PI_2),
    ];
    for (name, s, kappa, t_max) in cases {
        let mut worst = 0.0f64;
        let mut done = 0;
        while done < n {
            let p = s.sample_point(&mut rng);
            let q = s.sample_point(&mut rng);
            if kappa > 0.0 && s.distance(&p, &q) > FRAC_PI_2 {
                continue;
            }
            let xi = rng.gen_range(0.0..s.sigma(&p).len);
            let rep = verify_radial_comparison(&s, &p, xi, &q, kappa, &grid(t_max), h, tol)?;
            worst = worst.max(-rep.worst_margin);
            done += 1;
        }
        acc.metric(format!("{name}_worst_rise"), worst);
        acc.check(worst < tol, format!("{name} rise {worst:.3e}"));
    }
    Ok(acc)
}

/// A random tetrahedron with no short edges or thin faces.
pub fn random_tetrahedron<R: Rng + ?Sized>(rng: &mut R) -> Space {
    loop {
        let v: Vec<[f64; 3]> =
            (0..4).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        let (a, b, c) = (sub(v[1], v[0]), sub(v[2], v[0]), sub(v[3], v[0]));
        let vol = (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])).abs() / 6.0;
        if vol < 0.05 {
            continue;
        }
        if let Ok(m) = Mesh::from_coords(&v, &TETRA_FACES) {
            let s = Space::Mesh(m);
            let pts = s.cone_points();
            if pts.len() == 4 && pts.iter().all(|(_, a)| *a > 0.5) {
                return s;
            }
        }
    }
}

fn mesh_diameter(s: &Space) -> f64 {
    let v: Vec<Point> = s.cone_points().into_iter().map(|(p, _)| p).collect();
    let mut d = 0.0f64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            d = d.max(s.distance(&v[i], &v[j]));
        }
    }
    d
}

fn c5(quick: bool) -> Run {
    let mut acc = Acc::new();
    let n = if quick { 4 } else { 20 };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = QgCheckOptions { n_probes: 20, tol: 1e-6, seed: 5, ..Default::default() };
    let (mut turn, mut barrier, mut speed, mut ent, mut hits_min) = (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64, usize::MAX);
    let mut failed = 0;
    for _ in 0..n {
        let s = random_tetrahedron(&mut rng);
        let diam = mesh_diameter(&s);
        let verts = s.cone_points();
        let (a, theta_a) = verts[0];
        let b = verts[1].0;
        // Step back from A opposite the edge AB, then aim at A: the equal-split
        // continuation through A runs along AB.
        let to_b = s.directions_to(&a, &b)[0];
        let sig = s.sigma(&a);
        let back = sig.shift(to_b, theta_a / 2.0);
        let out = s.step(&a, back, 0.2 * diam);
        let start = out.end;
        let c = trace_quasigeodesic(&s, &start, out.back_dir, 5.0 * diam, 0.01)?;
        let hits = c.events.iter().filter(|e| matches!(e, alexgeo_core::flow::CurveEvent::Vertex { .. })).count();
        hits_min = hits_min.min(hits);
        let rep = check_quasigeodesic(&s, &c, &opts);
        let e = entropy(&c)?;
        turn = turn.min(rep.get("min_turn").unwrap_or(f64::NAN));
        barrier = barrier.max(rep.get("barrier_worst").unwrap_or(f64::NAN));
        speed = speed.max(rep.get("speed_defect").unwrap_or(f64::NAN));
        ent = ent.max(e.total.abs());
        if !rep.passed {
            failed += 1;
        }
    }
    acc.metric("min_turn", turn);
    acc.metric("barrier_worst", barrier);
    acc.metric("speed_defect", speed);
    acc.metric("entropy", ent);
    acc.metric("min_vertex_hits", hits_min as f64);
    acc.check(turn >= -1e-6, "development turn below -1e-6");
    acc.check(barrier <= 1e-6, "barrier test exceeded");
    acc.check(speed <= 1e-9, "speed defect above 1e-9");
    acc.check(ent < 1e-9, "nonzero entropy");
    acc.check(hits_min >= 2, "a trace hit fewer than two vertices");
    acc.check(failed == 0, format!("{failed} traces failed the checker"));
    Ok(acc)
}

/// A random strictly convex polygon: sorted angles on a circle, stretched.
pub fn random_polygon<R: Rng + ?Sized>(rng: &mut R) -> Space {
    loop {
        let k = rng.gen_range(3..9);
        let mut ang: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..TAU)).collect();
        ang.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (sx, sy, c) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        let v: Vec<[f64; 2]> = ang.iter().map(|a| [c[0] + sx * a.cos(), c[1] + sy * a.sin()]).collect();
        if let Ok(s) = Space::polygon(v) {
            if let Space::Polygon(g) = &s {
                if g.area() > 0.1 {
                    return s;
                }
            }
        }
    }
}

fn c6(quick: bool) -> Run {
    let mut acc = Acc::new();
    let n = if quick { 3 } else { 10 };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for k in 0..n {
        let s = random_polygon(&mut rng);
        let rep = boundary_concavity(&s, 200, 1e-9, k as u64)?;
        worst = worst.max(-rep.worst_margin);
        acc.check(rep.passed && rep.samples == 200, format!("polygon {k} failed"));
    }
    acc.metric("polygon_worst", worst);
    let cap = Space::cap(1.2)?;
    let rep = boundary_concavity(&cap, 100, 1e-8, 6)?;
    acc.metric("cap_worst", -rep.worst_margin);
    let per = rep.get("perimeter").unwrap_or(f64::NAN);
    acc.metric("cap_perimeter", per);
    acc.check(rep.passed, "cap concavity failed");
    acc.check(per <= TAU, "cap perimeter exceeds 2π");
    Ok(acc)
}

fn c7() -> Run {
    let mut acc = Acc::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::INFINITY;
    for theta in [FRAC_PI_2, PI, 4.0, 1.5 * PI, TAU] {
        let sig = Sigma::circle(theta);
        for _ in 0..100 {
            let u = TangentVec::new(1.0, rng.gen_range(0.0..theta), sig);
            let rep = polar_check(&u, &milka_polar(&u), 1e-9);
            worst = worst.min(rep.worst_margin);
            acc.check(rep.passed && rep.samples == 720, format!("θ={theta:.3} failed"));
        }
    }
    acc.metric("worst_margin", worst);
    Ok(acc)
}

fn c8(quick: bool) -> Run {
    let mut acc = Acc::new();
    let opts = ExtremalOptions { n_funcs: if quick { 6 } else { 20 }, n_steps: 200, h: 1e-2, ..Default::default() };
    let spaces = vec![
        ("square", Space::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])?),
        ("cap", Space::cap(1.0)?),
        ("cone_pi/2", Space::cone(FRAC_PI_2)?),
        ("cone_pi", Space::cone(PI)?),
        ("spindle_3pi/4", Space::spindle(0.75 * PI)?),
        ("tetra", regular_tetrahedron()),
    ];
    let mut drift = 0.0f64;
    let mut count = 0;
    for (name, s) in &spaces {
        for c in detect_extremal(s, &opts)? {
            if matches!(c.subset, Subset::Empty | Subset::Whole) {
                continue;
            }
            count += 1;
            let d = c.evidence.get("drift_per_time").unwrap_or(f64::NAN);
            drift = drift.max(d);
            acc.check(d < 1e-6, format!("{name} {}: drift {d:.3e}", c.subset.describe()));
            acc.check(c.evidence.passed, format!("{name} {}: {:?}", c.subset.describe(), c.evidence.notes));
        }
    }
    acc.metric("subsets", count as f64);
    acc.metric("max_drift_per_time", drift);
    let sq = &spaces[0].1;
    let corners: Vec<Point> = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]
        .iter()
        .map(|v| Point::Plane { x: v[0], y: v[1] })
        .collect();
    let mut lie = f64::INFINITY;
    let paths: Vec<Vec<Point>> = vec![
        corners.clone(),
        vec![Point::Plane { x: 0.2, y: 0.0 }, Point::Plane { x: 1.0, y: 0.0 }, Point::Plane { x: 1.0, y: 0.7 }],
        vec![Point::Plane { x: 0.0, y: 0.9 }, Point::Plane { x: 0.0, y: 0.1 }],
    ];
    for path in &paths {
        let rep = lieberman_check(sq, path, 0.01, &QgCheckOptions { tol: 1e-6, ..Default::default() })?;
        lie = lie.min(rep.worst_margin);
        acc.check(rep.passed, format!("Lieberman path failed: {:?}", rep.notes));
    }
    acc.metric("lieberman_worst_margin", lie);
    Ok(acc)
}

/// Closed form of the inf-convolution of `−|x − q|²/2`: `−|y − q|²/(2 − ε)`.
pub fn quadratic_envelope(y: [f64; 2], q: [f64; 2], eps: f64) -> f64 {
    -((y[0] - q[0]).powi(2) + (y[1] - q[1]).powi(2)) / (2.0 - eps)
}

fn polar_of(x: [f64; 2]) -> Point {
    Point::Polar { r: x[0].hypot(x[1]), phi: x[1].atan2(x[0]).rem_euclid(TAU) }
}

fn c9(quick: bool) -> Run {
    let mut acc = Acc::new();
    let s = Space::cone(TAU)?;
    let q = [0.3, -0.2];
    let f = Expr::scaled(-0.5, Expr::DistSq(polar_of(q)));
    let n = if quick { 12 } else { 50 };
    for eps in [1.0, 0.5] {
        let ic = InfConvolution::new(&f, &s, eps)?;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let y = [-1.0 + 2.0 * i as f64 / (n - 1) as f64, -1.0 + 2.0 * j as f64 / (n - 1) as f64];
                let v = ic.eval(&polar_of(y));
                worst = worst.max((v.value - quadratic_envelope(y, q, eps)).abs());
            }
        }
        acc.metric(format!("max_err_eps{eps}"), worst);
        acc.check(worst < 1e-6, format!("ε={eps} error {worst:.3e}"));
    }
    // δ(ε): distance of the measured concavity constant of f_ε from λ = −1.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut deltas = Vec::new();
    for eps in [1.0, 0.5, 0.25] {
        let ic = InfConvolution::new(&f, &s, eps)?;
        let d = 0.05;
        let mut lam = f64::NEG_INFINITY;
        for _ in 0..if quick { 5 } else { 20 } {
            let c = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            let a: f64 = rng.gen_range(0.0..TAU);
            let at = |t: f64| ic.eval(&polar_of([c[0] + t * a.cos(), c[1] + t * a.sin()])).value;
            lam = lam.max((at(-d) + at(d) - 2.0 * at(0.0)) / (d * d));
        }
        let delta = (lam + 1.0).abs();
        acc.metric(format!("delta_eps{eps}"), delta);
        deltas.push(delta);
    }
    acc.check(deltas.windows(2).all(|w| w[1] < w[0]), format!("δ not decreasing: {deltas:?}"));
    Ok(acc)
}

fn c10(quick: bool) -> Run {
    let mut acc = Acc::new();
    let plane = Space::cone(TAU)?;
    let p = Point::Polar { r: 0.0, phi: 0.0 };
    let funcs = [Expr::Dist(Point::Polar { r: 1.0, phi: 0.0 }), Expr::Dist(Point::Polar { r: 1.0, phi: 2.0 * PI / 3.0 })];
    let rep = tight_check(&plane, &funcs, &Ball { center: p, radius: 0.1 }, 500, 10)?;
    let sup = rep.get("sup").unwrap_or(f64::NAN);
    acc.metric("main_example_sup", sup);
    acc.check(sup < 0.0 && rep.samples == 500, "main example not tight");

    let sq = Space::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])?;
    let mut coords = Vec::new();
    for k in 0..3 {
        let a = TAU * k as f64 / 3.0;
        let c = Point::Plane { x: 0.05 * a.cos(), y: 0.05 * a.sin() };
        coords.push(build_strictly_concave(&sq, &c, 0.6, 50.0, 4, &BuildOptions { offset: a, ..Default::default() })?.expr);
    }
    let opts = TightImageOptions {
        domain: Some(vec![[-0.08, -0.08], [0.08, -0.08], [0.08, 0.08], [-0.08, 0.08]]),
        n_support: if quick { 100 } else { 1000 },
        n_critical: if quick { 40 } else { 200 },
        ..Default::default()
    };
    let img = tight_image_study(&sq, &coords, &opts)?;
    let r = &img.report;
    for key in ["support_tests", "support_worst", "chord_worst", "inverse_worst", "lipschitz_min", "lipschitz_max"] {
        acc.metric(key, r.get(key).unwrap_or(f64::NAN));
    }
    acc.check(r.passed, format!("tight image study failed: {:?}", r.notes));
    acc.check(r.get("inverse_worst").unwrap_or(f64::NAN) < 1e-4, "G∘F deviation");
    Ok(acc)
}

fn c11() -> Run {
    let mut acc = Acc::new();
    let s = Space::cone(1.5 * PI)?;
    let p = Point::Polar { r: 0.5, phi: 0.0 };
    let aim = s.directions_to(&p, &Point::Polar { r: 0.0, phi: 0.0 })[0];
    let mut totals = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let (_, e) = build_prequasigeodesic(&s, &p, aim, eps, 1.0, 1e-3)?;
        acc.metric(format!("entropy_eps{eps}"), e.total);
        totals.push(e.total.abs());
    }
    let ratios: Vec<f64> = totals.windows(2).map(|w| w[1] / w[0]).collect();
    acc.check(totals.windows(2).all(|w| w[1] < w[0]), format!("|entropy| not decreasing: {totals:?}"));
    acc.check(ratios.iter().all(|&r| r < 0.7), format!("halving ratios {ratios:?}"));
    Ok(acc)
}
