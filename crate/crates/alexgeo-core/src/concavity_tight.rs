//! Strictly concave functions from sums of `φ_{r,c} ∘ dist`, tight maps and
//! the geometry of their images.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeoError, Result};
use crate::functions::{check_concavity, sample_in_ball, Ball, ConcavityOptions, Expr};
use crate::radial::gexp_map;
use crate::report::Report;
use crate::spaces::{Point, Space, TangentVec};
use crate::tangent::{differential, gradient};

/// A φ-sum with its measured concavity.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictlyConcave {
    pub expr: Expr,
    pub centers: Vec<Point>,
    /// `−λ_measured` on `B_{r/4}(p)`; positive means strictly concave.
    pub margin: f64,
    pub report: Report,
}

/// Settings for [`build_strictly_concave`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Rotates the equally spaced directions.
    pub offset: f64,
    /// Shift so that `f(p) = 0`.
    pub normalize: bool,
    pub n_chords: usize,
    pub seed: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { offset: 0.0, normalize: true, n_chords: 100, seed: 0 }
    }
}

fn phi_sum(centers: &[Point], r: f64, c: f64) -> Expr {
    Expr::sum(centers.iter().map(|q| Expr::PhiRc { r, c, q: *q }).collect())
}

/// `f = Σ φ_{r,c} ∘ dist_{q_i}` with `q_i = gexp_p(r ξ_i)` for `n` equally
/// spaced directions `ξ_i`. Fails when the measured margin is not positive.
pub fn build_strictly_concave(space: &Space, p: &Point, r: f64, c: f64, n: usize, opts: &BuildOptions) -> Result<StrictlyConcave> {
    if !(r > 0.0 && c > 0.0 && n > 0) {
        return Err(GeoError::Domain(alloc::format!("need r > 0, c > 0, N > 0 (got {r}, {c}, {n})")));
    }
    let p = space.check_point(p)?;
    let sig = space.sigma(&p);
    let kappa = space.kappa();
    let mut centers = Vec::with_capacity(n);
    for i in 0..n {
        let a = sig.normalize(opts.offset + sig.len * i as f64 / n as f64);
        centers.push(gexp_map(space, &p, &TangentVec::new(r, a, sig), kappa, r / 200.0)?);
    }
    let mut expr = phi_sum(&centers, r, c);
    if opts.normalize {
        let v = expr.eval(space, &p);
        expr = Expr::Affine { weights: vec![1.0], constant: -v, terms: vec![expr] };
    }
    let region = Ball { center: p, radius: r / 4.0 };
    let copts = ConcavityOptions { n_geodesics: opts.n_chords, n_samples: 40, tol: 0.0, seed: opts.seed };
    let mut report = check_concavity(&expr, space, 0.0, &region, &copts);
    report.check = "strict concavity".into();
    let margin = -report.get("lambda_measured").unwrap_or(f64::NAN);
    report.metric("margin", margin);
    if !(margin > 0.0) {
        let eps = 0.5 * (TAU / n as f64);
        let suggest = 3.0 * n as f64 / eps.cos().powi(2).max(1e-3);
        return Err(GeoError::Invariant(alloc::format!(
            "φ-sum not strictly concave (margin {margin:.3e}); try c > {suggest:.1}"
        )));
    }
    Ok(StrictlyConcave { expr, centers, margin, report })
}

/// Tests that `{f ≥ level}` is convex within `region`: every geodesic between
/// two sampled points of the set stays in it up to `tol`.
pub fn superlevel_convexity(space: &Space, f: &Expr, region: &Ball, level: f64, n: usize, tol: f64, seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = Report::new("superlevel convexity", tol);
    let mut tries = 0;
    while rep.samples < n && tries < n * 1000 {
        tries += 1;
        let x = sample_in_ball(space, region, &mut rng);
        let y = sample_in_ball(space, region, &mut rng);
        if f.eval(space, &x) < level || f.eval(space, &y) < level {
            continue;
        }
        let worst = space
            .geodesic(&x, &y, 32)
            .iter()
            .map(|(_, z)| f.eval(space, z) - level)
            .fold(f64::INFINITY, f64::min);
        rep.margin(worst);
    }
    rep
}

/// Re-runs the strict concavity test with every center moved by up to `δ`.
/// Metric `min_margin` is the smallest margin over all perturbations.
pub fn perturbed_concavity(space: &Space, sc: &StrictlyConcave, r: f64, c: f64, deltas: &[f64], n: usize, seed: u64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = Report::new("perturbed concavity", 0.0);
    let p = region_center(space, &sc.centers);
    let mut min_margin = f64::INFINITY;
    for &d in deltas {
        for k in 0..n {
            let moved: Vec<Point> = sc
                .centers
                .iter()
                .map(|q| sample_in_ball(space, &Ball { center: *q, radius: d }, &mut rng))
                .collect();
            let f = phi_sum(&moved, r, c);
            let opts = ConcavityOptions { n_geodesics: 20, n_samples: 24, tol: 0.0, seed: seed ^ k as u64 };
            let chk = check_concavity(&f, space, 0.0, &Ball { center: p, radius: r / 4.0 }, &opts);
            let m = -chk.get("lambda_measured").unwrap_or(f64::NAN);
            min_margin = min_margin.min(m);
            rep.margin(m);
        }
    }
    rep.metric("min_margin", min_margin);
    Ok(rep)
}

/// The centroid of the centers in a polygon, elsewhere the midpoint of two
/// opposite centers; for symmetric configurations this is the base point.
fn region_center(space: &Space, centers: &[Point]) -> Point {
    if let Space::Polygon(_) = space {
        let (mut sx, mut sy) = (0.0, 0.0);
        for q in centers {
            if let Point::Plane { x, y } = *q {
                sx += x;
                sy += y;
            }
        }
        let n = centers.len() as f64;
        return Point::Plane { x: sx / n, y: sy / n };
    }
    let a = centers[0];
    let b = centers[centers.len() / 2];
    let d = space.distance(&a, &b);
    space.geodesic(&a, &b, 2).get(1).map_or(a, |x| if d > 0.0 { x.1 } else { a })
}

/// `d_x f_i(∇_x f_j)` over `i ≠ j` with the worst pair, and the regularity
/// value `max_ξ min_i d_x f_i(ξ)` over 360 directions.
fn tight_sample(space: &Space, funcs: &[Expr], x: &Point) -> Result<(f64, (usize, usize), f64)> {
    let dfs: Vec<_> = funcs.iter().map(|f| differential(f, space, x)).collect();
    let grads: Vec<TangentVec> = funcs.iter().map(|f| gradient(f, space, x)).collect::<Result<_>>()?;
    let mut sup = f64::NEG_INFINITY;
    let mut pair = (0, 0);
    for i in 0..funcs.len() {
        for j in 0..funcs.len() {
            if i != j {
                let v = dfs[i].at_vec(&grads[j]);
                if v > sup {
                    sup = v;
                    pair = (i, j);
                }
            }
        }
    }
    let sig = space.sigma(x);
    let reg = sig
        .grid(360)
        .into_iter()
        .map(|a| dfs.iter().map(|d| d.at(a)).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((sup, pair, reg))
}

/// Samples `region` and reports `sup d_x f_i(∇_x f_j)` (metric `sup`); the
/// collection is tight when it is negative. Also reports the fraction of
/// regular samples (metric `regular_fraction`), a point being regular when
/// some direction increases every `f_i`.
pub fn tight_check(space: &Space, funcs: &[Expr], region: &Ball, n_samples: usize, seed: u64) -> Result<Report> {
    for f in funcs {
        f.validate(space)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = Report::new("tight", 0.0);
    let mut sup = f64::NEG_INFINITY;
    let mut worst = None;
    let mut regular = 0usize;
    for _ in 0..n_samples {
        let x = sample_in_ball(space, region, &mut rng);
        let (s, pair, reg) = tight_sample(space, funcs, &x)?;
        if s > sup {
            sup = s;
            worst = Some((x, pair));
        }
        if reg > 1e-12 {
            regular += 1;
        }
        rep.samples += 1;
    }
    rep.worst_margin = -sup;
    rep.passed = funcs.len() < 2 || sup < 0.0;
    rep.metric("sup", sup);
    rep.metric("regular_fraction", regular as f64 / n_samples.max(1) as f64);
    if let Some((x, (i, j))) = worst {
        rep.note(alloc::format!("worst pair ({i}, {j}) at {x:?}"));
    }
    Ok(rep)
}

/// A convex region of the polygon chart with golden-section search over it.
struct Chart {
    verts: Vec<[f64; 2]>,
    lo: [f64; 2],
    hi: [f64; 2],
}

const GOLD: f64 = 0.618_033_988_749_894_8;

fn golden<F: FnMut(f64) -> f64>(mut a: f64, mut b: f64, mut f: F) -> (f64, f64) {
    let tol = 1e-13 * (1.0 + a.abs().max(b.abs()));
    let mut c = b - GOLD * (b - a);
    let mut d = a + GOLD * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLD * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLD * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    (x, f(x))
}

impl Chart {
    fn new(verts: Vec<[f64; 2]>) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &verts {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Chart { verts, lo, hi }
    }

    /// The vertical chord at abscissa `x`.
    fn chord(&self, x: f64) -> (f64, f64) {
        let n = self.verts.len();
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let (a, b) = (self.verts[i], self.verts[(i + 1) % n]);
            let (xa, xb) = (a[0].min(b[0]), a[0].max(b[0]));
            if x < xa || x > xb {
                continue;
            }
            if (b[0] - a[0]).abs() < 1e-300 {
                y0 = y0.min(a[1].min(b[1]));
                y1 = y1.max(a[1].max(b[1]));
            } else {
                let y = a[1] + (x - a[0]) / (b[0] - a[0]) * (b[1] - a[1]);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        if y0 > y1 {
            let m = (self.lo[1] + self.hi[1]) / 2.0;
            (m, m)
        } else {
            (y0, y1)
        }
    }

    /// Maximizes a concave function by nested golden-section searches.
    fn argmax<F: Fn([f64; 2]) -> f64>(&self, f: F) -> ([f64; 2], f64) {
        let inner = |x: f64| {
            let (y0, y1) = self.chord(x);
            golden(y0, y1, |y| f([x, y]))
        };
        let (x, _) = golden(self.lo[0], self.hi[0], |x| inner(x).1);
        let (y, v) = inner(x);
        ([x, y], v)
    }

    fn contains(&self, x: [f64; 2]) -> bool {
        let n = self.verts.len();
        (0..n).all(|i| {
            let (a, b) = (self.verts[i], self.verts[(i + 1) % n]);
            (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]) >= -1e-12
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        loop {
            let x = [rng.gen_range(self.lo[0]..=self.hi[0]), rng.gen_range(self.lo[1]..=self.hi[1])];
            if self.contains(x) {
                return x;
            }
        }
    }
}

/// Settings for [`tight_image_study`].
#[derive(Debug, Clone, PartialEq)]
pub struct TightImageOptions {
    /// Counter-clockwise vertices of the convex domain Ω; the whole polygon
    /// when absent.
    pub domain: Option<Vec<[f64; 2]>>,
    /// Grid resolution per axis for the image cloud.
    pub grid: usize,
    pub n_support: usize,
    pub n_critical: usize,
    pub tol_convex: f64,
    pub tol_inverse: f64,
    pub seed: u64,
}

impl Default for TightImageOptions {
    fn default() -> Self {
        TightImageOptions {
            domain: None,
            grid: 40,
            n_support: 1000,
            n_critical: 200,
            tol_convex: 1e-9,
            tol_inverse: 1e-4,
            seed: 0,
        }
    }
}

/// Image cloud and verification of a concave-coordinate map `F = (f_0..f_ℓ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TightImage {
    /// Rows `(x, y, f_0, …, f_ℓ)` over the domain grid.
    pub cloud: Vec<Vec<f64>>,
    /// Critical samples and their recovered preimages `G(F(x))`.
    pub critical: Vec<([f64; 2], [f64; 2])>,
    pub report: Report,
}

/// Convexity of `Q = F(Ω) + (R₋)^{ℓ+1}`, the critical locator
/// `G(y) = argmax_x min_i (f_i(x) − y_i)` and bi-Lipschitz ratios of F.
///
/// Each support test draws a weight `u ≥ 0`, maximizes `⟨u, F⟩`, checks that
/// the resulting hyperplane supports the whole image cloud, and checks that a
/// random point of a chord between two image points lies in Q. Critical
/// samples are the maximizers `x_u`; `G(F(x_u)) = x_u` is tested on them.
///
/// Metrics: `support_tests`, `support_worst`, `chord_worst`, `inverse_worst`,
/// `lipschitz_min`, `lipschitz_max`, `concavity_margin`.
pub fn tight_image_study(space: &Space, funcs: &[Expr], opts: &TightImageOptions) -> Result<TightImage> {
    let Space::Polygon(g) = space else {
        return Err(GeoError::Unsupported("tight images are computed on polygons".into()));
    };
    if funcs.is_empty() {
        return Err(GeoError::Domain("need at least one coordinate".into()));
    }
    for f in funcs {
        f.validate(space)?;
    }
    let chart = Chart::new(opts.domain.clone().unwrap_or_else(|| g.vertices.clone()));
    for v in &chart.verts {
        space.check_point(&Point::Plane { x: v[0], y: v[1] })?;
    }
    let m = funcs.len();
    let eval = |x: [f64; 2]| -> Vec<f64> {
        let p = Point::Plane { x: x[0], y: x[1] };
        funcs.iter().map(|f| f.eval(space, &p)).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rep = Report::new("tight image", opts.tol_convex);

    // Strict concavity on Ω.
    let mut worst_conc = f64::INFINITY;
    for _ in 0..100 {
        let a = chart.sample(&mut rng);
        let b = chart.sample(&mut rng);
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        let d2 = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)) / 4.0;
        if d2 < 1e-12 {
            continue;
        }
        let (fa, fb, fm) = (eval(a), eval(b), eval(mid));
        for i in 0..m {
            worst_conc = worst_conc.min((2.0 * fm[i] - fa[i] - fb[i]) / d2);
        }
    }
    rep.metric("concavity_margin", worst_conc);
    if !(worst_conc > 0.0) {
        return Err(GeoError::Invariant(alloc::format!(
            "coordinates are not strictly concave on the domain (chord margin {worst_conc:.3e})"
        )));
    }

    let n = opts.grid.max(2);
    let mut cloud = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            let x = [
                chart.lo[0] + (chart.hi[0] - chart.lo[0]) * i as f64 / n as f64,
                chart.lo[1] + (chart.hi[1] - chart.lo[1]) * j as f64 / n as f64,
            ];
            if chart.contains(x) {
                let mut row = vec![x[0], x[1]];
                row.extend(eval(x));
                cloud.push(row);
            }
        }
    }

    let random_weight = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let w: Vec<f64> = (0..m).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    };
    let in_q = |z: &[f64]| -> f64 {
        chart
            .argmax(|x| {
                let f = eval(x);
                (0..m).map(|i| f[i] - z[i]).fold(f64::INFINITY, f64::min)
            })
            .1
    };

    let mut support_worst = f64::INFINITY;
    let mut chord_worst = f64::INFINITY;
    for _ in 0..opts.n_support {
        let u = random_weight(&mut rng);
        let (_, h) = chart.argmax(|x| {
            let f = eval(x);
            (0..m).map(|i| u[i] * f[i]).sum()
        });
        let over = cloud
            .iter()
            .map(|row| (0..m).map(|i| u[i] * row[2 + i]).sum::<f64>() - h)
            .fold(f64::NEG_INFINITY, f64::max);
        support_worst = support_worst.min(-over);
        rep.margin(-over);
        let a = eval(chart.sample(&mut rng));
        let b = eval(chart.sample(&mut rng));
        let s = rng.gen::<f64>();
        let z: Vec<f64> = (0..m).map(|i| s * a[i] + (1.0 - s) * b[i]).collect();
        let v = in_q(&z);
        chord_worst = chord_worst.min(v);
        rep.margin(v);
    }
    rep.metric("support_tests", opts.n_support as f64);
    rep.metric("support_worst", support_worst);
    rep.metric("chord_worst", chord_worst);

    let mut critical = Vec::new();
    let mut inverse_worst = 0.0f64;
    for _ in 0..opts.n_critical {
        let u = random_weight(&mut rng);
        let (x, _) = chart.argmax(|x| {
            let f = eval(x);
            (0..m).map(|i| u[i] * f[i]).sum()
        });
        let y = eval(x);
        let (gx, _) = chart.argmax(|w| {
            let f = eval(w);
            (0..m).map(|i| f[i] - y[i]).fold(f64::INFINITY, f64::min)
        });
        inverse_worst = inverse_worst.max((gx[0] - x[0]).hypot(gx[1] - x[1]));
        critical.push((x, gx));
    }
    rep.metric("inverse_worst", inverse_worst);
    if inverse_worst >= opts.tol_inverse {
        rep.fail(alloc::format!("G∘F deviates by {inverse_worst:.3e}"));
    }

    let (mut lmin, mut lmax) = (f64::INFINITY, 0.0f64);
    for k in 1..critical.len() {
        let (a, b) = (critical[k - 1].0, critical[k].0);
        let d = (a[0] - b[0]).hypot(a[1] - b[1]);
        if d < 1e-6 {
            continue;
        }
        let (fa, fb) = (eval(a), eval(b));
        let e = (0..m).map(|i| (fa[i] - fb[i]).powi(2)).sum::<f64>().sqrt();
        lmin = lmin.min(e / d);
        lmax = lmax.max(e / d);
    }
    rep.metric("lipschitz_min", lmin);
    rep.metric("lipschitz_max", lmax);
    Ok(TightImage { cloud, critical, report: rep })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::phi_rc;
    use crate::functions::phi_rc_prime;
    use core::f64::consts::PI;

    fn origin() -> Point {
        Point::Polar { r: 0.0, phi: 0.0 }
    }

    #[test]
    fn phi_normalization() {
        assert_eq!(phi_rc(0.5, 50.0, 0.5), 0.0);
        assert_eq!(phi_rc_prime(0.5, 50.0, 0.5), 1.0);
    }

    #[test]
    fn plane_four_points() {
        let s = Space::cone(TAU).unwrap();
        let sc = build_strictly_concave(&s, &origin(), 0.5, 50.0, 4, &BuildOptions::default()).unwrap();
        assert!(sc.margin > 1.0, "{}", sc.margin);
        assert!(sc.expr.eval(&s, &origin()).abs() < 1e-12);
        let r = superlevel_convexity(&s, &sc.expr, &Ball { center: origin(), radius: 0.1 }, -0.5, 100, 1e-12, 3);
        assert!(r.passed && r.samples == 100, "{r:?}");
    }

    #[test]
    fn margin_grows_with_c() {
        let s = Space::cone(TAU).unwrap();
        let o = BuildOptions::default();
        let a = build_strictly_concave(&s, &origin(), 0.5, 20.0, 4, &o).unwrap().margin;
        let b = build_strictly_concave(&s, &origin(), 0.5, 40.0, 4, &o).unwrap().margin;
        assert!(b > a);
    }

    #[test]
    fn small_c_fails() {
        let s = Space::cone(TAU).unwrap();
        assert!(build_strictly_concave(&s, &origin(), 0.5, 0.2, 4, &BuildOptions::default()).is_err());
    }

    #[test]
    fn main_example_tight() {
        let s = Space::cone(TAU).unwrap();
        let p = origin();
        let a0 = Point::Polar { r: 1.0, phi: 0.0 };
        let a1 = Point::Polar { r: 1.0, phi: 2.0 * PI / 3.0 };
        let funcs = [Expr::Dist(a0), Expr::Dist(a1)];
        let r = tight_check(&s, &funcs, &Ball { center: p, radius: 0.05 }, 200, 0).unwrap();
        assert!(r.passed && r.get("sup").unwrap() < 0.0);
        assert_eq!(r.get("regular_fraction").unwrap(), 1.0);
        let same = [Expr::Dist(a0), Expr::Dist(a0)];
        let r = tight_check(&s, &same, &Ball { center: p, radius: 0.05 }, 50, 0).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn square_three_points() {
        let s = Space::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let c = Point::Plane { x: 0.5, y: 0.5 };
        let funcs: Vec<Expr> = (0..3)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 3.0 + 0.2;
                Expr::Dist(Point::Plane { x: 0.5 + 0.45 * a.cos(), y: 0.5 + 0.45 * a.sin() })
            })
            .collect();
        let ball = Ball { center: c, radius: 0.03 };
        let r = tight_check(&s, &funcs, &ball, 200, 1).unwrap();
        assert!(r.passed, "{r:?}");
        let r = tight_check(&s, &funcs[..2], &ball, 200, 1).unwrap();
        assert_eq!(r.get("regular_fraction").unwrap(), 1.0);
    }

    #[test]
    fn single_coordinate_image() {
        let s = Space::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
        let p = Point::Plane { x: 0.0, y: 0.0 };
        let sc = build_strictly_concave(&s, &p, 0.6, 50.0, 4, &BuildOptions::default()).unwrap();
        let opts = TightImageOptions {
            domain: Some(vec![[-0.1, -0.1], [0.1, -0.1], [0.1, 0.1], [-0.1, 0.1]]),
            grid: 10,
            n_support: 20,
            n_critical: 5,
            ..Default::default()
        };
        let img = tight_image_study(&s, &[sc.expr], &opts).unwrap();
        assert!(img.report.passed, "{:?}", img.report);
        for (x, _) in &img.critical {
            assert!(x[0].hypot(x[1]) < 1e-6);
        }
    }
}
