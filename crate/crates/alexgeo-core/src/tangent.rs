//! Differentials, gradients, supporting and polar vectors on Σ_p.
//!
//! Σ_p is a circle or an arc, so a differential is a function of one angle and
//! the gradient is a global one-dimensional maximization.

use crate::ext::RemEuclid;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use num_traits::Float;

use crate::error::{GeoError, Result};
use crate::functions::Expr;
use crate::report::Report;
use crate::spaces::{Point, Sigma, Space, TangentVec};

const GRID: usize = 720;

/// A positively homogeneous function on T_p, restricted to Σ_p.
#[derive(Debug, Clone, PartialEq)]
pub enum Diff {
    Zero,
    /// A constant on Σ_p (the differential of dist_q at q).
    Unit(f64),
    /// `coeff · min_ξ (−cos ∠(x, ξ))`.
    Leaf { coeff: f64, dirs: Vec<f64> },
    /// `coeff · min_ξ cos ∠(x, ξ)`.
    Cos { coeff: f64, dirs: Vec<f64> },
    Sum(Vec<Diff>),
    Min(Vec<Diff>),
    Max(Vec<Diff>),
}

impl Diff {
    pub fn scale(self, c: f64) -> Diff {
        match self {
            Diff::Zero => Diff::Zero,
            Diff::Unit(a) => Diff::Unit(a * c),
            Diff::Leaf { coeff, dirs } => Diff::Leaf { coeff: coeff * c, dirs },
            Diff::Cos { coeff, dirs } => Diff::Cos { coeff: coeff * c, dirs },
            Diff::Sum(v) => Diff::Sum(v.into_iter().map(|d| d.scale(c)).collect()),
            Diff::Min(v) if c >= 0.0 => Diff::Min(v.into_iter().map(|d| d.scale(c)).collect()),
            Diff::Min(v) => Diff::Max(v.into_iter().map(|d| d.scale(c)).collect()),
            Diff::Max(v) if c >= 0.0 => Diff::Max(v.into_iter().map(|d| d.scale(c)).collect()),
            Diff::Max(v) => Diff::Min(v.into_iter().map(|d| d.scale(c)).collect()),
        }
    }

    /// Value at the unit direction with coordinate `x`.
    pub fn eval(&self, sigma: &Sigma, x: f64) -> f64 {
        match self {
            Diff::Zero => 0.0,
            Diff::Unit(a) => *a,
            Diff::Leaf { coeff, dirs } => {
                if dirs.is_empty() {
                    return 0.0;
                }
                coeff * dirs.iter().map(|&d| -sigma.dist(x, d).cos()).fold(f64::INFINITY, f64::min)
            }
            Diff::Cos { coeff, dirs } => {
                if dirs.is_empty() {
                    return 0.0;
                }
                coeff * dirs.iter().map(|&d| sigma.dist(x, d).cos()).fold(f64::INFINITY, f64::min)
            }
            Diff::Sum(v) => v.iter().map(|d| d.eval(sigma, x)).sum(),
            Diff::Min(v) => v.iter().map(|d| d.eval(sigma, x)).fold(f64::INFINITY, f64::min),
            Diff::Max(v) => v.iter().map(|d| d.eval(sigma, x)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Directions where the differential may fail to be smooth.
    pub fn kinks(&self, sigma: &Sigma, out: &mut Vec<f64>) {
        match self {
            Diff::Leaf { dirs, .. } | Diff::Cos { dirs, .. } => {
                for &d in dirs {
                    out.push(d);
                    if sigma.closed {
                        out.push(sigma.normalize(d + sigma.len / 2.0));
                    } else {
                        out.push((d - PI).clamp(0.0, sigma.len));
                        out.push((d + PI).clamp(0.0, sigma.len));
                    }
                }
            }
            Diff::Sum(v) | Diff::Min(v) | Diff::Max(v) => v.iter().for_each(|d| d.kinks(sigma, out)),
            _ => {}
        }
    }

    /// On a full 2π circle a sum of single-direction leaves is `⟨g, ·⟩`;
    /// returns `g` as a planar vector in that case.
    fn linear_vector(&self) -> Option<[f64; 2]> {
        match self {
            Diff::Zero => Some([0.0, 0.0]),
            Diff::Leaf { coeff, dirs } if dirs.len() == 1 => {
                Some([-coeff * dirs[0].cos(), -coeff * dirs[0].sin()])
            }
            Diff::Cos { coeff, dirs } if dirs.len() == 1 => Some([coeff * dirs[0].cos(), coeff * dirs[0].sin()]),
            Diff::Sum(v) => {
                let mut g = [0.0, 0.0];
                for d in v {
                    let h = d.linear_vector()?;
                    g[0] += h[0];
                    g[1] += h[1];
                }
                Some(g)
            }
            Diff::Min(v) | Diff::Max(v) if v.len() == 1 => v[0].linear_vector(),
            _ => None,
        }
    }
}

/// The differential d_pf as a function on Σ_p.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalFn {
    pub sigma: Sigma,
    pub diff: Diff,
    pub value: f64,
}

impl DirectionalFn {
    pub fn at(&self, x: f64) -> f64 {
        self.diff.eval(&self.sigma, x)
    }

    /// d_pf(v) = |v| d_pf(ξ_v).
    pub fn at_vec(&self, v: &TangentVec) -> f64 {
        if v.norm == 0.0 {
            0.0
        } else {
            v.norm * self.at(v.angle)
        }
    }

    pub fn kinks(&self) -> Vec<f64> {
        let mut k = Vec::new();
        self.diff.kinks(&self.sigma, &mut k);
        k
    }
}

pub fn differential(f: &Expr, space: &Space, p: &Point) -> DirectionalFn {
    let (value, diff) = f.eval_diff(space, p);
    DirectionalFn { sigma: space.sigma(p), diff, value }
}

/// ⟨u, v⟩ in T_p.
pub fn scalar_product(u: &TangentVec, v: &TangentVec) -> f64 {
    u.dot(v)
}

fn golden_max(df: &DirectionalFn, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = df.at(c);
    let mut fd = df.at(d);
    while b - a > 1e-12 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = df.at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = df.at(d);
        }
    }
    polish(df, (a + b) / 2.0)
}

/// Golden section locates a smooth maximum only to ~1e-8; a bisection on the
/// symmetric difference brings the coordinate down to ~1e-11 when the maximum
/// is smooth.
fn polish(df: &DirectionalFn, x: f64) -> (f64, f64) {
    let h = 1e-5;
    let w = 1e-6;
    let g = |y: f64| df.at(y + h) - df.at(y - h);
    let (mut lo, mut hi) = (x - w, x + w);
    let fx = df.at(x);
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return (fx, x);
    }
    for _ in 0..60 {
        let mid = (lo + hi) / 2.0;
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y = (lo + hi) / 2.0;
    let fy = df.at(y);
    if fy >= fx - 1e-15 {
        (fy, y)
    } else {
        (fx, x)
    }
}

/// Global maximum of d_pf over Σ_p: `(value, coordinate)`.
///
/// Scans a 720-point grid plus the kinks and refines every local maximum by
/// golden section. Maxima equal within 1e-10 that sit in one cluster resolve
/// to the smallest coordinate; separate ones are an error.
pub fn maximize(df: &DirectionalFn) -> Result<(f64, f64)> {
    let sig = df.sigma;
    let mut xs = sig.grid(GRID);
    xs.extend(df.kinks().into_iter().map(|k| sig.normalize(k)));
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let n = xs.len();
    let vals: Vec<f64> = xs.iter().map(|&x| df.at(x)).collect();
    let mut cands: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let (prev, next) = if sig.closed {
            ((i + n - 1) % n, (i + 1) % n)
        } else {
            (i.saturating_sub(1), (i + 1).min(n - 1))
        };
        if vals[i] < vals[prev] || vals[i] < vals[next] {
            continue;
        }
        let mut lo = xs[prev];
        let mut hi = xs[next];
        if sig.closed {
            if i == 0 {
                lo -= sig.len;
            }
            if i == n - 1 {
                hi += sig.len;
            }
        }
        let (v, x) = if hi > lo { golden_max(df, lo, hi) } else { (vals[i], xs[i]) };
        if v >= vals[i] {
            cands.push((v, sig.normalize(x)));
        } else {
            cands.push((vals[i], xs[i]));
        }
    }
    if cands.is_empty() {
        return Ok((vals[0], xs[0]));
    }
    let m = cands.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-10 * m.abs().max(1.0);
    let mut top: Vec<f64> = cands.iter().filter(|c| c.0 >= m - tie).map(|c| c.1).collect();
    top.sort_by(|a, b| a.total_cmp(b));
    let first = top[0];
    let spread = top.iter().map(|&x| sig.dist(first, x)).fold(0.0, f64::max);
    if spread > 1e-6 && m > 1e-12 {
        return Err(GeoError::NonUniqueMax { lo: first, hi: top[top.len() - 1] });
    }
    Ok((m, first))
}

fn gradient_inner(df: &DirectionalFn, lenient: bool) -> Result<TangentVec> {
    let sig = df.sigma;
    if sig.closed && (sig.len - TAU).abs() < 1e-12 {
        if let Some(g) = df.diff.linear_vector() {
            let n = g[0].hypot(g[1]);
            if n <= 1e-14 {
                return Ok(TangentVec::origin(sig));
            }
            return Ok(TangentVec::new(n, g[1].atan2(g[0]), sig));
        }
    }
    let (m, x) = match maximize(df) {
        Ok(r) => r,
        Err(GeoError::NonUniqueMax { lo, .. }) if lenient => (df.at(lo), lo),
        Err(e) => return Err(e),
    };
    if m <= 1e-12 {
        Ok(TangentVec::origin(sig))
    } else {
        Ok(TangentVec::new(m, x, sig))
    }
}

/// ∇_pf without the a-posteriori check; ties resolve to the smallest
/// coordinate.
pub fn gradient_fast(f: &Expr, space: &Space, p: &Point) -> Result<TangentVec> {
    gradient_inner(&differential(f, space, p), true)
}

/// ∇_pf, verified against d_pf(x) ≤ ⟨∇_pf, x⟩ on a 720-point grid.
pub fn gradient(f: &Expr, space: &Space, p: &Point) -> Result<TangentVec> {
    let df = differential(f, space, p);
    let g = gradient_inner(&df, false)?;
    let worst = gradient_defect(&df, &g);
    if worst > 1e-9 {
        return Err(GeoError::Invariant(alloc::format!(
            "d_pf exceeds ⟨∇f, ·⟩ by {worst:e}; f is not semiconcave at this point"
        )));
    }
    Ok(g)
}

/// `max_x d_pf(x) − ⟨g, x⟩` over the grid.
pub fn gradient_defect(df: &DirectionalFn, g: &TangentVec) -> f64 {
    let sig = df.sigma;
    sig.grid(GRID)
        .into_iter()
        .map(|x| df.at(x) - g.dot(&TangentVec::new(1.0, x, sig)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Checks d_pf(x) ≤ −⟨s, x⟩ on 720 directions.
pub fn supporting_check(f: &Expr, space: &Space, p: &Point, s: &TangentVec, tol: f64) -> Report {
    let df = differential(f, space, p);
    let mut rep = Report::new("supporting", tol);
    for x in df.sigma.grid(GRID) {
        let u = TangentVec::new(1.0, x, df.sigma);
        rep.margin(-s.dot(&u) - df.at(x));
    }
    rep
}

/// The supporting vector `−d_pf(ξ_min)·ξ_min` built from the minimum of d_pf.
pub fn supporting_vector(f: &Expr, space: &Space, p: &Point) -> TangentVec {
    let df = differential(f, space, p);
    let sig = df.sigma;
    if sig.closed && (sig.len - TAU).abs() < 1e-12 {
        if let Some(g) = df.diff.linear_vector() {
            let n = g[0].hypot(g[1]);
            if n <= 1e-14 {
                return TangentVec::origin(sig);
            }
            return TangentVec::new(n, (-g[1]).atan2(-g[0]), sig);
        }
    }
    let mut best = (f64::INFINITY, 0.0);
    for x in sig.grid(GRID) {
        let v = df.at(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    let h = sig.len / GRID as f64;
    let neg = DirectionalFn { sigma: sig, diff: df.diff.clone().scale(-1.0), value: 0.0 };
    let (nv, x) = golden_max(&neg, best.1 - h, best.1 + h);
    let (v, x) = if -nv < best.0 { (-nv, sig.normalize(x)) } else { best };
    if v >= 0.0 {
        TangentVec::origin(sig)
    } else {
        TangentVec::new(-v, x, sig)
    }
}

/// Milka's polar vector: the endpoint of a length-π quasigeodesic on Σ_p.
/// On a circle that is the point at arc distance π (mod the length); on an
/// arc the path is traced on the doubled circle and folded back.
pub fn milka_polar(v: &TangentVec) -> TangentVec {
    let sig = v.sigma;
    let a = if sig.closed {
        sig.normalize(v.angle + PI)
    } else {
        let t = (v.angle + PI).rem_euclid(2.0 * sig.len);
        if t > sig.len {
            2.0 * sig.len - t
        } else {
            t
        }
    };
    TangentVec::new(v.norm, a, sig)
}

/// The polar vector |v|·∇_o dist_ξ on T_p; its norm may be below |v|.
pub fn gradient_polar(v: &TangentVec) -> TangentVec {
    let sig = v.sigma;
    let (far, a) = if sig.closed {
        ((sig.len / 2.0).min(PI), sig.normalize(v.angle + sig.len / 2.0))
    } else if v.angle >= sig.len - v.angle {
        (v.angle.min(PI), 0.0)
    } else {
        ((sig.len - v.angle).min(PI), sig.len)
    };
    let n = -far.cos();
    if n <= 1e-15 || v.norm == 0.0 {
        TangentVec::origin(sig)
    } else {
        TangentVec::new(v.norm * n, a, sig)
    }
}

/// Grid check of ⟨u, x⟩ + ⟨w, x⟩ ≥ −tol.
pub fn polar_check(u: &TangentVec, w: &TangentVec, tol: f64) -> Report {
    let sig = u.sigma;
    let mut rep = Report::new("polar", tol);
    for x in sig.grid(GRID) {
        let e = TangentVec::new(1.0, x, sig);
        rep.margin(u.dot(&e) + w.dot(&e));
    }
    rep
}

/// Same-norm polar vector, verified on the grid.
pub fn polar_vector(v: &TangentVec) -> Result<TangentVec> {
    let w = milka_polar(v);
    let rep = polar_check(v, &w, 1e-9 * v.norm.max(1.0));
    if !rep.passed {
        return Err(GeoError::Invariant(alloc::format!(
            "polar verification failed by {:e}",
            -rep.worst_margin
        )));
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn plane() -> Space {
        Space::cone(TAU).unwrap()
    }

    #[test]
    fn plane_distance_gradient_points_away() {
        let s = plane();
        let q = Point::Polar { r: 0.0, phi: 0.0 };
        let p = Point::Polar { r: 1.0, phi: 0.7 };
        let g = gradient(&Expr::Dist(q), &s, &p).unwrap();
        assert_relative_eq!(g.norm, 1.0, epsilon = 1e-12);
        assert_relative_eq!(g.angle, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn apex_gradient_on_three_halves_cone() {
        let s = Space::cone(1.5 * PI).unwrap();
        let o = Point::Polar { r: 0.0, phi: 0.0 };
        let q = Point::Polar { r: 1.0, phi: 0.5 };
        let g = gradient(&Expr::Dist(q), &s, &o).unwrap();
        assert_relative_eq!(g.norm, 0.5f64.sqrt(), epsilon = 1e-10);
        assert_relative_eq!(g.sigma.dist(g.angle, 0.5), 0.75 * PI, epsilon = 1e-9);
    }

    #[test]
    fn narrow_apex_has_zero_gradient() {
        let s = Space::cone(PI).unwrap();
        let o = Point::Polar { r: 0.0, phi: 0.0 };
        let f = Expr::DistSq(Point::Polar { r: 1.0, phi: 0.2 });
        assert!(gradient(&Expr::Dist(Point::Polar { r: 1.0, phi: 0.2 }), &s, &o).unwrap().is_origin());
        assert!(gradient(&f, &s, &o).unwrap().is_origin());
    }

    #[test]
    fn polar_examples() {
        let v = TangentVec::new(1.0, 0.3, Sigma::circle(TAU));
        assert_relative_eq!(milka_polar(&v).angle, 0.3 + PI, epsilon = 1e-15);
        let w = TangentVec::new(1.0, 0.0, Sigma::circle(1.5 * PI));
        let ws = polar_vector(&w).unwrap();
        assert_relative_eq!(ws.angle, PI, epsilon = 1e-15);
        assert_relative_eq!(w.sigma.dist(0.0, ws.angle), PI / 2.0, epsilon = 1e-15);
        let z = TangentVec::new(1.0, 0.4, Sigma::circle(PI));
        assert_relative_eq!(polar_vector(&z).unwrap().angle, 0.4, epsilon = 1e-15);
        let e = TangentVec::new(1.0, 0.4, Sigma::arc(PI));
        assert!(polar_check(&e, &milka_polar(&e), 1e-12).passed);
        let g = gradient_polar(&w);
        assert_relative_eq!(g.norm, 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(polar_check(&w, &g, 1e-12).passed);
    }

    #[test]
    fn supporting_vector_dominates_gradient() {
        let s = Space::cone(1.5 * PI).unwrap();
        let p = Point::Polar { r: 0.3, phi: 1.0 };
        let f = Expr::scaled(-1.0, Expr::DistSq(Point::Polar { r: 1.0, phi: 2.0 }));
        let sv = supporting_vector(&f, &s, &p);
        assert!(supporting_check(&f, &s, &p, &sv, 1e-9).passed);
        let o = Point::Polar { r: 0.0, phi: 0.0 };
        let h = Expr::DistSq(Point::Polar { r: 1.0, phi: 2.0 });
        let sa = supporting_vector(&h, &s, &o);
        assert_relative_eq!(sa.norm, 2.0, epsilon = 1e-9);
        assert!(supporting_check(&h, &s, &o, &sa, 1e-9).passed);
        assert!(sa.norm >= gradient(&h, &s, &o).unwrap().norm - 1e-9);
        assert!(sv.norm >= gradient(&f, &s, &p).unwrap().norm - 1e-9);
    }

    #[test]
    fn distance_at_its_center_has_no_unique_maximizer() {
        let s = plane();
        let q = Point::Polar { r: 1.0, phi: 0.0 };
        assert!(matches!(gradient(&Expr::Dist(q), &s, &q), Err(GeoError::NonUniqueMax { .. })));
    }
}
