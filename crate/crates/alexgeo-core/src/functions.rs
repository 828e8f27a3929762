//! Semiconcave functions built from distance functions.
//!
//! An [`Expr`] is a tree over distance leaves closed under affine combinations,
//! minima and non-decreasing outer maps of squared distances. Evaluation
//! returns the value together with the differential as a [`Diff`] tree.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeoError, Result};
use crate::model_plane::{cs, rho, second_difference_excess, sigma};
use crate::report::Report;
use crate::spaces::{Point, Space};
use crate::tangent::Diff;

/// φ_{r,c}(x) = (x − r) − c(x − r)²/r.
pub fn phi_rc(r: f64, c: f64, x: f64) -> f64 {
    let y = x - r;
    y - c * y * y / r
}

/// First derivative of φ_{r,c}.
pub fn phi_rc_prime(r: f64, c: f64, x: f64) -> f64 {
    1.0 - 2.0 * c * (x - r) / r
}

/// Expression tree for a semiconcave function.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Expr {
    Dist(Point),
    DistSq(Point),
    /// ρ_κ ∘ dist_q.
    RhoDist { kappa: f64, q: Point },
    /// φ_{r,c} ∘ dist_q.
    PhiRc { r: f64, c: f64, q: Point },
    Affine { weights: Vec<f64>, constant: f64, terms: Vec<Expr> },
    Min(Vec<Expr>),
    /// A non-decreasing map (affine with non-negative weights and minima) of
    /// squared distances.
    Theta(Box<Expr>),
    /// Distance to the boundary.
    DistBoundary,
    /// σ_κ ∘ dist_∂.
    SigmaBoundary { kappa: f64 },
    /// Average distance to a finite set of points.
    MeanDist(Vec<Point>),
}

impl Expr {
    pub fn sum(terms: Vec<Expr>) -> Expr {
        Expr::Affine { weights: vec![1.0; terms.len()], constant: 0.0, terms }
    }

    pub fn scaled(w: f64, e: Expr) -> Expr {
        Expr::Affine { weights: vec![w], constant: 0.0, terms: vec![e] }
    }

    pub fn theta(inner: Expr) -> Result<Expr> {
        fn ok(e: &Expr) -> bool {
            match e {
                Expr::DistSq(_) => true,
                Expr::Affine { weights, terms, .. } => weights.iter().all(|&w| w >= 0.0) && terms.iter().all(ok),
                Expr::Min(ts) => ts.iter().all(ok),
                _ => false,
            }
        }
        if !ok(&inner) {
            return Err(GeoError::Domain(
                "an outer map must be built from squared distances with non-negative weights and minima".into(),
            ));
        }
        Ok(Expr::Theta(Box::new(inner)))
    }

    /// Checks the structure and that every leaf lies in `space`.
    pub fn validate(&self, space: &Space) -> Result<()> {
        match self {
            Expr::Dist(q) | Expr::DistSq(q) | Expr::RhoDist { q, .. } | Expr::PhiRc { q, .. } => {
                space.check_point(q).map(|_| ())
            }
            Expr::Affine { weights, terms, .. } => {
                if weights.len() != terms.len() {
                    return Err(GeoError::Domain("affine weights and terms differ in length".into()));
                }
                terms.iter().try_for_each(|t| t.validate(space))
            }
            Expr::Min(ts) => {
                if ts.is_empty() {
                    return Err(GeoError::Domain("min of nothing".into()));
                }
                ts.iter().try_for_each(|t| t.validate(space))
            }
            Expr::Theta(inner) => {
                Expr::theta((**inner).clone())?;
                inner.validate(space)
            }
            Expr::DistBoundary | Expr::SigmaBoundary { .. } => {
                if space.has_boundary() {
                    Ok(())
                } else {
                    Err(GeoError::Domain("the space has no boundary".into()))
                }
            }
            Expr::MeanDist(ps) => ps.iter().try_for_each(|q| space.check_point(q).map(|_| ())),
        }
    }

    pub fn eval(&self, space: &Space, p: &Point) -> f64 {
        match self {
            Expr::Dist(q) => space.distance(p, q),
            Expr::DistSq(q) => {
                let d = space.distance(p, q);
                d * d
            }
            Expr::RhoDist { kappa, q } => rho(*kappa, space.distance(p, q)),
            Expr::PhiRc { r, c, q } => phi_rc(*r, *c, space.distance(p, q)),
            Expr::Affine { weights, constant, terms } => {
                constant + weights.iter().zip(terms).map(|(w, t)| w * t.eval(space, p)).sum::<f64>()
            }
            Expr::Min(ts) => ts.iter().map(|t| t.eval(space, p)).fold(f64::INFINITY, f64::min),
            Expr::Theta(inner) => inner.eval(space, p),
            Expr::DistBoundary => space.boundary_feet(p).map_or(f64::NAN, |b| b.0),
            Expr::SigmaBoundary { kappa } => space.boundary_feet(p).map_or(f64::NAN, |b| sigma(*kappa, b.0)),
            Expr::MeanDist(ps) => ps.iter().map(|q| space.distance(p, q)).sum::<f64>() / ps.len().max(1) as f64,
        }
    }

    /// Value and differential at `p` by the chain rule.
    pub fn eval_diff(&self, space: &Space, p: &Point) -> (f64, Diff) {
        let leaf = |q: &Point| -> (f64, Diff) {
            let d = space.distance(p, q);
            if d == 0.0 {
                (0.0, Diff::Unit(1.0))
            } else {
                (d, Diff::Leaf { coeff: 1.0, dirs: space.directions_to(p, q) })
            }
        };
        match self {
            Expr::Dist(q) => leaf(q),
            Expr::DistSq(q) => {
                let (d, df) = leaf(q);
                if d == 0.0 {
                    (0.0, Diff::Zero)
                } else {
                    (d * d, df.scale(2.0 * d))
                }
            }
            Expr::RhoDist { kappa, q } => {
                let (d, df) = leaf(q);
                if d == 0.0 {
                    (0.0, Diff::Zero)
                } else {
                    (rho(*kappa, d), df.scale(sigma(*kappa, d)))
                }
            }
            Expr::PhiRc { r, c, q } => {
                let (d, df) = leaf(q);
                (phi_rc(*r, *c, d), df.scale(phi_rc_prime(*r, *c, d)))
            }
            Expr::Affine { weights, constant, terms } => {
                let mut v = *constant;
                let mut ds = Vec::with_capacity(terms.len());
                for (w, t) in weights.iter().zip(terms) {
                    let (tv, td) = t.eval_diff(space, p);
                    v += w * tv;
                    if *w != 0.0 {
                        ds.push(td.scale(*w));
                    }
                }
                (v, Diff::Sum(ds))
            }
            Expr::Min(ts) => {
                let vals: Vec<(f64, Diff)> = ts.iter().map(|t| t.eval_diff(space, p)).collect();
                let m = vals.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
                let tol = 1e-12 * (1.0 + m.abs());
                let active: Vec<Diff> = vals.into_iter().filter(|x| x.0 <= m + tol).map(|x| x.1).collect();
                (m, Diff::Min(active))
            }
            Expr::Theta(inner) => inner.eval_diff(space, p),
            Expr::DistBoundary => match space.boundary_feet(p) {
                Some((d, dirs)) => (d, Diff::Cos { coeff: 1.0, dirs }),
                None => (f64::NAN, Diff::Zero),
            },
            Expr::SigmaBoundary { kappa } => match space.boundary_feet(p) {
                Some((d, dirs)) => (sigma(*kappa, d), Diff::Cos { coeff: cs(*kappa, d), dirs }),
                None => (f64::NAN, Diff::Zero),
            },
            Expr::MeanDist(ps) => {
                let n = ps.len().max(1) as f64;
                let mut v = 0.0;
                let mut ds = Vec::with_capacity(ps.len());
                for q in ps {
                    let (d, df) = leaf(q);
                    v += d;
                    ds.push(df.scale(1.0 / n));
                }
                (v / n, Diff::Sum(ds))
            }
        }
    }
}

/// A closed metric ball used as a sampling region.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

/// A random point of the ball, uniform in geodesic polar coordinates.
pub fn sample_in_ball<R: Rng + ?Sized>(space: &Space, ball: &Ball, rng: &mut R) -> Point {
    if let (Space::Polygon(g), Point::Plane { x, y }) = (space, ball.center) {
        for _ in 0..10_000 {
            let r = ball.radius * rng.gen::<f64>().sqrt();
            let a = rng.gen_range(0.0..core::f64::consts::TAU);
            let q = [x + r * a.cos(), y + r * a.sin()];
            if g.contains(q, 0.0) {
                return Point::Plane { x: q[0], y: q[1] };
            }
        }
        return ball.center;
    }
    let sig = space.sigma(&ball.center);
    let dir = rng.gen::<f64>() * sig.len;
    let r = ball.radius * rng.gen::<f64>().sqrt();
    space.trace(&ball.center, dir, r).1.end
}

/// Worst normalized excess of `f` along sampled points of a curve:
/// `max (f(t−d) + f(t+d) − 2cs_κ(d) f(t) − 2λρ_κ(d)) / d²`.
pub fn concavity_excess(values: &[(f64, f64)], kappa: f64, lambda: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for w in values.windows(3) {
        let d1 = w[1].0 - w[0].0;
        let d2 = w[2].0 - w[1].0;
        if !(d1 > 0.0) || (d1 - d2).abs() > 1e-9 * d1.max(1.0) {
            continue;
        }
        worst = worst.max(second_difference_excess(kappa, lambda, d1, w[0].1, w[1].1, w[2].1));
    }
    worst
}

/// Options for [`check_concavity`].
#[derive(Debug, Clone, Copy)]
pub struct ConcavityOptions {
    pub n_geodesics: usize,
    pub n_samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ConcavityOptions {
    fn default() -> Self {
        ConcavityOptions { n_geodesics: 100, n_samples: 40, tol: 1e-9, seed: 0 }
    }
}

/// Tests λ-concavity of `f` along chords between random points of `region`.
/// The report's worst margin is `-max excess`; the largest normalized second
/// difference seen is reported as `lambda_measured`.
pub fn check_concavity(f: &Expr, space: &Space, lambda: f64, region: &Ball, opts: &ConcavityOptions) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rep = Report::new("concavity", opts.tol);
    let mut lam_meas = f64::NEG_INFINITY;
    let mut worst_chord = None;
    let mut done = 0;
    let mut tries = 0;
    while done < opts.n_geodesics && tries < opts.n_geodesics * 20 {
        tries += 1;
        let p = sample_in_ball(space, region, &mut rng);
        let q = sample_in_ball(space, region, &mut rng);
        let len = space.distance(&p, &q);
        if len < 1e-3 * region.radius.max(1e-9) {
            continue;
        }
        let pts = space.geodesic(&p, &q, opts.n_samples);
        if pts.len() < 3 {
            continue;
        }
        done += 1;
        let vals: Vec<(f64, f64)> = pts.iter().map(|(t, x)| (*t, f.eval(space, x))).collect();
        let ex = concavity_excess(&vals, 0.0, lambda);
        lam_meas = lam_meas.max(ex + lambda);
        if -ex < rep.worst_margin {
            worst_chord = Some((p, q));
        }
        rep.margin(-ex);
    }
    rep.metric("lambda", lambda);
    rep.metric("lambda_measured", lam_meas);
    if let Some((p, q)) = worst_chord {
        rep.note(alloc::format!("worst chord {:?} -> {:?}", p, q));
    }
    rep
}

/// Result of one inf-convolution query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfConvValue {
    pub value: f64,
    pub argmin: Point,
    /// False when the minimum sits on the search boundary (not attained).
    pub in_domain: bool,
}

/// f_ε(y) = min_x { f(x) + |xy|²/ε }, by polar sampling and compass search.
#[derive(Debug, Clone)]
pub struct InfConvolution<'a> {
    pub f: &'a Expr,
    pub space: &'a Space,
    pub eps: f64,
    /// Search radius; defaults to 2ε(|∇_y f| + 1).
    pub radius: Option<f64>,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl<'a> InfConvolution<'a> {
    pub fn new(f: &'a Expr, space: &'a Space, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(GeoError::Domain("ε must be positive".into()));
        }
        Ok(InfConvolution { f, space, eps, radius: None, n_radial: 40, n_angular: 72 })
    }

    fn objective(&self, y: &Point, x: &Point) -> f64 {
        let d = self.space.distance(x, y);
        self.f.eval(self.space, x) + d * d / self.eps
    }

    pub fn eval(&self, y: &Point) -> InfConvValue {
        let radius = self.radius.unwrap_or_else(|| {
            let g = crate::tangent::gradient_fast(self.f, self.space, y).map_or(1.0, |g| g.norm);
            2.0 * self.eps * (g + 1.0)
        });
        let sig = self.space.sigma(y);
        let mut best = (self.objective(y, y), *y, 0.0);
        for i in 1..=self.n_radial {
            let r = radius * i as f64 / self.n_radial as f64;
            for j in 0..self.n_angular {
                let a = sig.len * j as f64 / self.n_angular as f64;
                let x = self.space.trace(y, a, r).1.end;
                let v = self.objective(y, &x);
                if v < best.0 {
                    best = (v, x, r);
                }
            }
        }
        let (mut v, mut x) = (best.0, best.1);
        let mut h = radius / self.n_radial as f64;
        while h > 1e-11 * radius.max(1.0) {
            let s = self.space.sigma(&x);
            let mut moved = false;
            for k in 0..8 {
                let a = s.len * k as f64 / 8.0;
                let cand = self.space.trace(&x, a, h).1.end;
                let cv = self.objective(y, &cand);
                if cv < v {
                    v = cv;
                    x = cand;
                    moved = true;
                    break;
                }
            }
            if !moved {
                h *= 0.5;
            }
        }
        let in_domain = self.space.distance(&x, y) < 0.99 * radius;
        InfConvValue { value: v, argmin: x, in_domain }
    }
}

/// The averaged distance to `p`: the mean of dist_x over `n_mc` points drawn
/// uniformly (in geodesic polar coordinates) from B_ε(p).
pub fn smooth_distance(space: &Space, p: &Point, eps: f64, n_mc: usize, seed: u64) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ball = Ball { center: *p, radius: eps };
    let pts = (0..n_mc).map(|_| sample_in_ball(space, &ball, &mut rng)).collect();
    Expr::MeanDist(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::TAU;

    fn plane() -> Space {
        Space::cone(TAU).unwrap()
    }

    fn pt(x: f64, y: f64) -> Point {
        Point::Polar { r: x.hypot(y), phi: y.atan2(x).rem_euclid(TAU) }
    }

    #[test]
    fn leaf_values() {
        let s = plane();
        let q = pt(1.0, 2.0);
        assert_eq!(Expr::Dist(q).eval(&s, &q), 0.0);
        let p = pt(-1.0, 0.5);
        let d = s.distance(&p, &q);
        assert_relative_eq!(Expr::RhoDist { kappa: 0.0, q }.eval(&s, &p), d * d / 2.0, epsilon = 1e-12);
        let at_r = pt(1.0, 2.0 + 0.3);
        assert_relative_eq!(Expr::PhiRc { r: 0.3, c: 12.0, q }.eval(&s, &at_r), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn phi_normalization() {
        let (r, c) = (0.4, 7.0);
        assert_eq!(phi_rc(r, c, r), 0.0);
        assert_eq!(phi_rc_prime(r, c, r), 1.0);
        let h = 1e-4;
        let second = (phi_rc(r, c, r + h) + phi_rc(r, c, r - h) - 2.0 * phi_rc(r, c, r)) / (h * h);
        assert_relative_eq!(second, -2.0 * c / r, epsilon = 1e-6);
    }

    #[test]
    fn theta_rejects_negative_weights() {
        let q = pt(0.0, 0.0);
        assert!(Expr::theta(Expr::scaled(-1.0, Expr::DistSq(q))).is_err());
        assert!(Expr::theta(Expr::Min(vec![Expr::DistSq(q), Expr::scaled(2.0, Expr::DistSq(q))])).is_ok());
        assert!(Expr::theta(Expr::Dist(q)).is_err());
    }

    #[test]
    fn negative_square_is_minus_two_concave() {
        let s = plane();
        let f = Expr::scaled(-1.0, Expr::DistSq(pt(0.2, 0.1)));
        let ball = Ball { center: pt(0.0, 0.0), radius: 1.0 };
        let o = ConcavityOptions { n_geodesics: 30, ..Default::default() };
        assert!(check_concavity(&f, &s, -2.0, &ball, &o).passed);
        assert!(!check_concavity(&f, &s, -2.1, &ball, &o).passed);
    }

    #[test]
    fn distance_is_not_concave_across_its_center() {
        let s = plane();
        let f = Expr::Dist(pt(0.0, 0.0));
        let ball = Ball { center: pt(0.0, 0.0), radius: 1.0 };
        let o = ConcavityOptions { n_geodesics: 30, ..Default::default() };
        assert!(!check_concavity(&f, &s, 0.0, &ball, &o).passed);
    }

    #[test]
    fn inf_convolution_quadratic() {
        let s = plane();
        let q = pt(0.3, -0.2);
        let f = Expr::scaled(-0.5, Expr::DistSq(q));
        let ic = InfConvolution::new(&f, &s, 1.0).unwrap();
        let y = pt(0.7, 0.4);
        let out = ic.eval(&y);
        let dq = s.distance(&y, &q);
        assert!(out.in_domain);
        assert_relative_eq!(out.value, -dq * dq / (2.0 - 1.0), epsilon = 1e-8);
    }

    #[test]
    fn smoothed_distance_at_center() {
        let s = plane();
        let p = pt(0.0, 0.0);
        let f = smooth_distance(&s, &p, 0.3, 20_000, 7);
        assert_relative_eq!(f.eval(&s, &p), 0.2, epsilon = 3e-3);
    }
}
