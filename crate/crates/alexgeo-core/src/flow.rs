//! Gradient curves and the gradient flow by broken geodesics.

use num_traits::Float;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{GeoError, Result};
use crate::functions::{Ball, Expr};
use crate::model_plane::theta;
use crate::report::Report;
use crate::spaces::{Point, Space, StepEvent, TangentVec};
use crate::tangent::{gradient, gradient_fast};

/// Where a curve came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Provenance {
    GradientCurve,
    Radial,
    Geodesic,
    TracedQg,
    User,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CurveEvent {
    /// A step ended at a cone point.
    Vertex { index: usize, t: f64 },
    /// A step ended on the boundary.
    Boundary { index: usize, t: f64 },
    /// The gradient vanished; the curve is constant from here on.
    Stop { index: usize, t: f64 },
    /// The curve left its region or stalled.
    Truncated { index: usize, t: f64, reason: String },
}

/// A sampled curve with its one-sided tangents.
///
/// `right[i]` is γ⁺ at sample `i` (the velocity used for the following step);
/// `left[i]` is the direction back along the previous step, scaled by the
/// speed of that step.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveRecord {
    pub provenance: Provenance,
    pub h: f64,
    pub t: Vec<f64>,
    pub points: Vec<Point>,
    pub right: Vec<Option<TangentVec>>,
    pub left: Vec<Option<TangentVec>>,
    pub events: Vec<CurveEvent>,
}

impl CurveRecord {
    pub fn new(provenance: Provenance, h: f64, start: Point) -> Self {
        CurveRecord {
            provenance,
            h,
            t: alloc::vec![0.0],
            points: alloc::vec![start],
            right: alloc::vec![None],
            left: alloc::vec![None],
            events: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn end(&self) -> Point {
        self.points[self.points.len() - 1]
    }

    pub fn duration(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    pub(crate) fn push(&mut self, t: f64, p: Point, left: Option<TangentVec>) {
        self.t.push(t);
        self.points.push(p);
        self.right.push(None);
        self.left.push(left);
    }

    pub fn stopped(&self) -> bool {
        self.events.iter().any(|e| matches!(e, CurveEvent::Stop { .. }))
    }

    /// Position at parameter `t`, moving from the last sample at or before `t`
    /// along its right tangent.
    pub fn point_at(&self, space: &Space, t: f64) -> Point {
        let i = match self.t.iter().rposition(|&s| s <= t) {
            Some(i) => i,
            None => return self.points[0],
        };
        let dt = t - self.t[i];
        match self.right[i] {
            Some(v) if dt > 0.0 && v.norm > 0.0 && i + 1 < self.len() => {
                let span = self.t[i + 1] - self.t[i];
                let out = space.step(&self.points[i], v.angle, v.norm * dt.min(span));
                out.end
            }
            _ => self.points[i],
        }
    }

    /// Cumulative length of the polygonal path through the samples.
    pub fn arclength(&self, space: &Space) -> Vec<f64> {
        let mut s = alloc::vec![0.0];
        for w in self.points.windows(2) {
            let d = space.distance(&w[0], &w[1]);
            s.push(s[s.len() - 1] + d);
        }
        s
    }
}

/// Integration settings for [`gradient_curve_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlowOptions {
    pub h: f64,
    /// Below this gradient norm the curve stops.
    pub tol_stop: f64,
    /// Verify the gradient inequality at every step.
    pub verify: bool,
    /// Leaving this ball truncates the curve.
    pub region: Option<Ball>,
    pub max_steps: usize,
}

impl FlowOptions {
    pub fn new(h: f64) -> Self {
        FlowOptions { h, tol_stop: 1e-8, verify: true, region: None, max_steps: 10_000_000 }
    }
}

pub fn gradient_curve(f: &Expr, space: &Space, p: &Point, duration: f64, h: f64) -> Result<CurveRecord> {
    gradient_curve_with(f, space, p, duration, &FlowOptions::new(h))
}

/// Euler broken-geodesic scheme for α⁺ = ∇f: each step moves along the
/// geodesic in the gradient direction for arclength `dt·|∇f|`. Steps split at
/// cone points and the boundary, where the gradient is re-evaluated.
pub fn gradient_curve_with(f: &Expr, space: &Space, p: &Point, duration: f64, opts: &FlowOptions) -> Result<CurveRecord> {
    if !(opts.h > 0.0) || !(duration >= 0.0) {
        return Err(GeoError::Domain(alloc::format!("step {} and duration {} must be positive", opts.h, duration)));
    }
    let start = space.check_point(p)?;
    let mut rec = CurveRecord::new(Provenance::GradientCurve, opts.h, start);
    let mut cur = start;
    let mut t = 0.0;
    let mut stalls = 0;
    let mut steps = 0;
    while duration - t > 1e-14 * duration.max(1.0) {
        steps += 1;
        if steps > opts.max_steps {
            let idx = rec.len() - 1;
            rec.events.push(CurveEvent::Truncated { index: idx, t, reason: "step budget exhausted".into() });
            break;
        }
        let g = if opts.verify { gradient(f, space, &cur) } else { gradient_fast(f, space, &cur) };
        let g = g.map_err(|e| GeoError::Invariant(alloc::format!("gradient at t={t} {cur:?}: {e}")))?;
        let idx = rec.len() - 1;
        if g.norm < opts.tol_stop {
            rec.right[idx] = Some(TangentVec::origin(g.sigma));
            rec.events.push(CurveEvent::Stop { index: idx, t });
            rec.push(duration, cur, None);
            break;
        }
        rec.right[idx] = Some(g);
        let dt = opts.h.min(duration - t);
        let mut out = space.step(&cur, g.angle, dt * g.norm);
        if out.traveled <= 1e-15 && out.event == StepEvent::Boundary {
            if let Some(o) = space.slide(&cur, g.angle, dt * g.norm) {
                out = o;
            }
        }
        let used = out.traveled / g.norm;
        if out.traveled <= 1e-15 {
            stalls += 1;
            if stalls >= 3 {
                rec.events.push(CurveEvent::Truncated { index: idx, t, reason: "no progress along the gradient".into() });
                break;
            }
        } else {
            stalls = 0;
        }
        t = if out.event == StepEvent::None { t + dt } else { t + used.min(dt) };
        let back = TangentVec::new(g.norm, out.back_dir, space.sigma(&out.end));
        rec.push(t, out.end, Some(back));
        let i = rec.len() - 1;
        match out.event {
            StepEvent::Vertex => rec.events.push(CurveEvent::Vertex { index: i, t }),
            StepEvent::Boundary => rec.events.push(CurveEvent::Boundary { index: i, t }),
            StepEvent::None => {}
        }
        cur = out.end;
        if let Some(ball) = &opts.region {
            if space.distance(&ball.center, &cur) > ball.radius {
                rec.events.push(CurveEvent::Truncated { index: i, t, reason: "left the region".into() });
                break;
            }
        }
    }
    Ok(rec)
}

/// Φ^t applied to each point.
pub fn flow_map(f: &Expr, space: &Space, points: &[Point], t: f64, h: f64) -> Result<Vec<Point>> {
    let mut opts = FlowOptions::new(h);
    opts.verify = false;
    points
        .iter()
        .map(|p| gradient_curve_with(f, space, p, t, &opts).map(|c| c.end()))
        .collect()
}

/// Checks the three distance estimates for pairs of gradient curves:
/// (i) |α(t)β(t)| ≤ e^{λt}|pq|, (ii) the one-moving-end bound and
/// (iii) the two-times bound, each in both orders. Margins are in distance
/// units (square roots of the squared bounds).
pub fn verify_distance_estimates(
    f: &Expr,
    space: &Space,
    lambda: f64,
    pairs: &[(Point, Point)],
    t_grid: &[f64],
    h: f64,
    tol: f64,
) -> Result<Report> {
    let mut rep = Report::new("distance_estimates", tol);
    let t_max = t_grid.iter().cloned().fold(0.0, f64::max);
    let mut opts = FlowOptions::new(h);
    opts.verify = false;
    let (mut w1, mut w2, mut w3) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for (p, q) in pairs {
        let a = gradient_curve_with(f, space, p, t_max, &opts)?;
        let b = gradient_curve_with(f, space, q, t_max, &opts)?;
        let at: Vec<Point> = t_grid.iter().map(|&t| a.point_at(space, t)).collect();
        let bt: Vec<Point> = t_grid.iter().map(|&t| b.point_at(space, t)).collect();
        let pq = space.distance(p, q);
        for (i, &t) in t_grid.iter().enumerate() {
            let m = (lambda * t).exp() * pq - space.distance(&at[i], &bt[i]);
            w1 = w1.min(m);
            rep.margin(m);
        }
        for (x, y, c, tr) in [(p, q, &at, &b), (q, p, &bt, &a)] {
            let fx = f.eval(space, x);
            let fy = f.eval(space, y);
            let gx = gradient_fast(f, space, x)?.norm;
            let bound = |dt: f64| {
                let th = theta(lambda, dt);
                pq * pq + (2.0 * fx - 2.0 * fy + lambda * pq * pq) * th + gx * gx * th * th
            };
            for (i, &t) in t_grid.iter().enumerate() {
                let m = bound(t).max(0.0).sqrt() - space.distance(&c[i], y);
                w2 = w2.min(m);
                rep.margin(m);
            }
            for (i, &tp) in t_grid.iter().enumerate() {
                for &tq in t_grid.iter().filter(|&&s| s <= tp) {
                    let yq = tr.point_at(space, tq);
                    let rhs = (2.0 * lambda * tq).exp() * bound(tp - tq);
                    let m = rhs.max(0.0).sqrt() - space.distance(&c[i], &yq);
                    w3 = w3.min(m);
                    rep.margin(m);
                }
            }
        }
    }
    rep.metric("worst_i", w1);
    rep.metric("worst_ii", w2);
    rep.metric("worst_iii", w3);
    Ok(rep)
}

/// Discrete length element bound for γ₁(s) = Φ^{τ(s)}γ₀(s): for consecutive
/// samples with τ-values τ_a ≥ τ_b,
/// Δσ² ≤ e^{2λτ_b}[Δs² + {2f(γ₀(a)) − 2f(γ₀(b)) + λΔs²}θ_λ(Δτ) + |∇f|²θ_λ(Δτ)²].
pub fn length_element_check(
    f: &Expr,
    space: &Space,
    lambda: f64,
    gamma0: &CurveRecord,
    tau: &dyn Fn(f64) -> f64,
    h: f64,
    tol: f64,
) -> Result<Report> {
    let mut rep = Report::new("length_element", tol);
    let s = gamma0.arclength(space);
    let mut opts = FlowOptions::new(h);
    opts.verify = false;
    let mut img = Vec::with_capacity(s.len());
    for (i, p) in gamma0.points.iter().enumerate() {
        let c = gradient_curve_with(f, space, p, tau(s[i]), &opts)?;
        img.push(c.end());
    }
    for i in 0..s.len().saturating_sub(1) {
        let ds = s[i + 1] - s[i];
        let (ta, tb) = (tau(s[i]), tau(s[i + 1]));
        let (a, b, tlo) = if ta >= tb { (i, i + 1, tb) } else { (i + 1, i, ta) };
        let dtau = (ta - tb).abs();
        let fa = f.eval(space, &gamma0.points[a]);
        let fb = f.eval(space, &gamma0.points[b]);
        let g = gradient_fast(f, space, &gamma0.points[a])?.norm;
        let th = theta(lambda, dtau);
        let rhs = (2.0 * lambda * tlo).exp() * (ds * ds + (2.0 * fa - 2.0 * fb + lambda * ds * ds) * th + g * g * th * th);
        let dsigma = space.distance(&img[i], &img[i + 1]);
        rep.margin(rhs.max(0.0).sqrt() - dsigma);
    }
    Ok(rep)
}

/// λ-concavity of f along the arclength reparametrization of a gradient
/// curve, from second differences over equal arclength spacing.
pub fn arclength_concavity(f: &Expr, space: &Space, curve: &CurveRecord, lambda: f64, n: usize, tol: f64) -> Report {
    let mut rep = Report::new("arclength_concavity", tol);
    let s = curve.arclength(space);
    let total = s[s.len() - 1];
    if total <= 0.0 || n < 3 {
        return rep;
    }
    let mut vals = Vec::with_capacity(n + 1);
    let mut j = 0;
    for k in 0..=n {
        let target = total * k as f64 / n as f64;
        while j + 1 < s.len() - 1 && s[j + 1] <= target {
            j += 1;
        }
        let seg = s[j + 1] - s[j];
        let p = if seg > 0.0 && target > s[j] {
            match space.directions_to(&curve.points[j], &curve.points[j + 1]).first() {
                Some(&a) => space.step(&curve.points[j], a, target - s[j]).end,
                None => curve.points[j],
            }
        } else {
            curve.points[j]
        };
        vals.push((target, f.eval(space, &p)));
    }
    let d = total / n as f64;
    for w in vals.windows(3) {
        let ex = (w[0].1 + w[2].1 - 2.0 * w[1].1 - lambda * d * d) / (d * d);
        rep.margin(-ex * d * d);
    }
    rep
}

/// Observed orders log₂(e_k / e_{k+1}) for errors at successively halved steps.
pub fn convergence_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::{PI, TAU};

    fn plane() -> Space {
        Space::cone(TAU).unwrap()
    }

    fn origin() -> Point {
        Point::Polar { r: 0.0, phi: 0.0 }
    }

    fn quad() -> Expr {
        Expr::scaled(-0.5, Expr::DistSq(origin()))
    }

    #[test]
    fn quadratic_flow_is_first_order() {
        let s = plane();
        let p = Point::Polar { r: 1.0, phi: 0.3 };
        let errs: Vec<f64> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&h| {
                let c = gradient_curve(&quad(), &s, &p, 1.0, h).unwrap();
                (s.distance(&origin(), &c.end()) - (-1.0f64).exp()).abs()
            })
            .collect();
        assert!(errs[2] < 1e-3);
        for o in convergence_orders(&errs) {
            assert!(o > 0.9, "{o}");
        }
    }

    #[test]
    fn distance_flow_moves_straight_away() {
        let s = plane();
        let q = Point::Polar { r: 1.0, phi: 0.0 };
        let c = gradient_curve(&Expr::Dist(origin()), &s, &q, 0.5, 0.01).unwrap();
        let end = c.end();
        assert_relative_eq!(s.distance(&origin(), &end), 1.5, epsilon = 1e-9);
        assert_relative_eq!(s.distance(&q, &end), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn apex_start_on_three_halves_cone() {
        let s = Space::cone(1.5 * PI).unwrap();
        let q = Point::Polar { r: 1.0, phi: 0.0 };
        let f = Expr::Dist(q);
        let c = gradient_curve(&f, &s, &origin(), 0.2, 0.01).unwrap();
        assert_relative_eq!(c.right[0].unwrap().norm, 0.5f64.sqrt(), epsilon = 1e-9);
        let ends: Vec<Point> = [0.02, 0.01, 0.005]
            .iter()
            .map(|&h| gradient_curve(&f, &s, &origin(), 0.2, h).unwrap().end())
            .collect();
        let e1 = s.distance(&ends[0], &ends[2]);
        let e2 = s.distance(&ends[1], &ends[2]);
        assert!(e2 <= e1 + 1e-12);
    }

    #[test]
    fn stop_at_critical_point() {
        let s = plane();
        let c = gradient_curve(&quad(), &s, &origin(), 1.0, 0.1).unwrap();
        assert!(c.stopped());
        assert_eq!(c.end(), origin());
    }

    #[test]
    fn estimates_hold_for_quadratic_flow() {
        let s = plane();
        let pairs = [
            (Point::Polar { r: 1.0, phi: 0.0 }, Point::Polar { r: 0.5, phi: 2.0 }),
            (Point::Polar { r: 0.3, phi: 1.0 }, Point::Polar { r: 1.2, phi: 4.0 }),
        ];
        let rep = verify_distance_estimates(&quad(), &s, -1.0, &pairs, &[0.0, 0.25, 0.5, 1.0], 1e-3, 1e-2).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.get("worst_i").unwrap().abs() < 1e-2);
    }

    #[test]
    fn semigroup() {
        let s = plane();
        let p = [Point::Polar { r: 1.0, phi: 0.4 }];
        let a = flow_map(&quad(), &s, &p, 0.7, 1e-3).unwrap();
        let b = flow_map(&quad(), &s, &flow_map(&quad(), &s, &p, 0.3, 1e-3).unwrap(), 0.4, 1e-3).unwrap();
        assert!(s.distance(&a[0], &b[0]) < 2e-3);
    }

    #[test]
    fn length_element_identity_and_scaling() {
        let s = plane();
        let g0 = {
            let mut c = CurveRecord::new(Provenance::User, 0.1, Point::Plane { x: 0.0, y: 0.0 });
            for i in 1..=10 {
                c.push(i as f64 * 0.1, Point::Polar { r: 1.0, phi: i as f64 * 0.1 }, None);
            }
            c.points[0] = Point::Polar { r: 1.0, phi: 0.0 };
            c
        };
        let r0 = length_element_check(&quad(), &s, -1.0, &g0, &|_| 0.0, 1e-3, 1e-12).unwrap();
        assert!(r0.passed);
        let r1 = length_element_check(&quad(), &s, -1.0, &g0, &|_| 0.5, 1e-3, 1e-3).unwrap();
        assert!(r1.passed);
    }
}
