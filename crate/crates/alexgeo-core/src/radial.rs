//! Radial curves and the gradient exponential map.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use num_traits::Float;

use crate::error::{GeoError, Result};
use crate::flow::{CurveEvent, CurveRecord, Provenance};
use crate::functions::Expr;
use crate::model_plane::{comparison_angle, model_side};
use crate::report::Report;
use crate::spaces::{Point, Space, StepEvent, TangentVec};
use crate::tangent::{differential, gradient_fast};

/// Speed factor m_κ(r, t): r/t, tanh r/tanh t or tan r/tan t.
pub fn speed_factor(kappa: f64, r: f64, t: f64) -> f64 {
    if kappa > 0.0 {
        r.tan() / t.tan()
    } else if kappa < 0.0 {
        r.tanh() / t.tanh()
    } else {
        r / t
    }
}

fn check_kappa(kappa: f64, t: f64) -> Result<()> {
    if kappa != 0.0 && kappa != 1.0 && kappa != -1.0 {
        return Err(GeoError::Curvature(alloc::format!("radial curves take kappa in {{-1, 0, 1}}, got {kappa}")));
    }
    if kappa > 0.0 && t > FRAC_PI_2 + 1e-12 {
        return Err(GeoError::Domain(alloc::format!("spherical radial curves live on [0, pi/2], got T = {t}")));
    }
    Ok(())
}

fn minimizing(space: &Space, p: &Point, q: &Point, t: f64) -> bool {
    (space.distance(p, q) - t).abs() <= 1e-9 * t.max(1.0)
}

/// The radial curve t ↦ gexp_p(κ; tξ) on [0, T].
///
/// While |pα(t)| = t the curve is the geodesic from p in direction ξ; the
/// exit time is found by bisection, since a geodesic that stops minimizing
/// never starts again. Afterwards α⁺ = m_κ(|pα|, t)·∇dist_p is integrated
/// with Euler steps of size `h`.
pub fn radial_curve(space: &Space, p: &Point, xi: f64, kappa: f64, duration: f64, h: f64) -> Result<CurveRecord> {
    check_kappa(kappa, duration)?;
    if !(h > 0.0) || !(duration >= 0.0) {
        return Err(GeoError::Domain(alloc::format!("step {h} and duration {duration} must be positive")));
    }
    let p = space.check_point(p)?;
    let sig = space.sigma(&p);
    let xi = sig.normalize(xi);
    let mut rec = CurveRecord::new(Provenance::Radial, h, p);
    if duration == 0.0 {
        return Ok(rec);
    }
    let full = space.step(&p, xi, duration);
    let mut tg = full.traveled;
    if !minimizing(space, &p, &full.end, tg) {
        let (mut lo, mut hi) = (0.0, tg);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if minimizing(space, &p, &space.step(&p, xi, mid).end, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 {
                break;
            }
        }
        tg = lo;
    }
    rec.right[0] = Some(TangentVec::new(1.0, xi, sig));
    let n_geo = (tg / h).ceil() as usize;
    let mut cur = p;
    for k in 1..=n_geo {
        let t = (k as f64 * h).min(tg);
        let out = space.step(&p, xi, t);
        let back = TangentVec::new(1.0, out.back_dir, space.sigma(&out.end));
        rec.push(t, out.end, Some(back));
        let i = rec.len() - 1;
        let fwd = space.continuation(&out.end, out.back_dir).unwrap_or(out.back_dir);
        rec.right[i] = Some(TangentVec::new(1.0, fwd, space.sigma(&out.end)));
        cur = out.end;
    }
    let mut t = rec.duration();
    if tg < duration - 1e-14 && tg >= full.traveled - 1e-12 {
        let i = rec.len() - 1;
        match full.event {
            StepEvent::Vertex => rec.events.push(CurveEvent::Vertex { index: i, t }),
            StepEvent::Boundary => rec.events.push(CurveEvent::Boundary { index: i, t }),
            StepEvent::None => {}
        }
    }
    let target = Expr::Dist(p);
    let mut stalls = 0;
    while duration - t > 1e-14 {
        let idx = rec.len() - 1;
        let g = gradient_fast(&target, space, &cur)?;
        let cert = space.distance_certified(&p, &cur);
        let mut dt = h.min(duration - t);
        if cert.error > 0.1 * h {
            dt *= 0.5;
        }
        let m = speed_factor(kappa, cert.value, t);
        let speed = m * g.norm;
        if speed < 1e-12 {
            rec.right[idx] = Some(TangentVec::origin(g.sigma));
            rec.events.push(CurveEvent::Stop { index: idx, t });
            rec.push(duration, cur, None);
            break;
        }
        rec.right[idx] = Some(TangentVec::new(speed, g.angle, g.sigma));
        let out = space.step(&cur, g.angle, dt * speed);
        if out.traveled <= 1e-15 {
            stalls += 1;
            if stalls >= 3 {
                rec.events.push(CurveEvent::Truncated { index: idx, t, reason: "no progress".into() });
                break;
            }
        } else {
            stalls = 0;
        }
        t = if out.event == StepEvent::None { t + dt } else { t + (out.traveled / speed).min(dt) };
        let back = TangentVec::new(speed, out.back_dir, space.sigma(&out.end));
        rec.push(t, out.end, Some(back));
        let i = rec.len() - 1;
        match out.event {
            StepEvent::Vertex => rec.events.push(CurveEvent::Vertex { index: i, t }),
            StepEvent::Boundary => rec.events.push(CurveEvent::Boundary { index: i, t }),
            StepEvent::None => {}
        }
        cur = out.end;
    }
    Ok(rec)
}

/// gexp_p(κ; v).
pub fn gexp_map(space: &Space, p: &Point, v: &TangentVec, kappa: f64, h: f64) -> Result<Point> {
    if v.norm == 0.0 {
        return space.check_point(p);
    }
    Ok(radial_curve(space, p, v.angle, kappa, v.norm, h)?.end())
}

/// Distance on T_p for the Euclidean cone (κ=0), the elliptic cone (κ=−1)
/// or the spherical suspension (κ=1).
pub fn tangent_cone_metric(kappa: f64, u: &TangentVec, v: &TangentVec) -> Result<f64> {
    let alpha = if u.norm == 0.0 || v.norm == 0.0 { 0.0 } else { u.sigma.dist(u.angle, v.angle) };
    model_side(kappa, u.norm, v.norm, alpha)
}

/// Samples ∠̃_κ(t, |gexp_p(κ; tξ) q|, |pq|) on `t_grid` and checks it never
/// rises above an earlier value by more than `tol`.
pub fn verify_radial_comparison(
    space: &Space,
    p: &Point,
    xi: f64,
    q: &Point,
    kappa: f64,
    t_grid: &[f64],
    h: f64,
    tol: f64,
) -> Result<Report> {
    let mut rep = Report::new("radial_comparison", tol);
    let t_max = t_grid.iter().cloned().fold(0.0, f64::max);
    let pq = space.distance(p, q);
    if kappa > 0.0 && pq > FRAC_PI_2 + 1e-12 {
        return Err(GeoError::Domain(alloc::format!("|pq| = {pq} exceeds pi/2")));
    }
    let curve = radial_curve(space, p, xi, kappa, t_max, h)?;
    let mut best = f64::INFINITY;
    let mut rise: f64 = 0.0;
    let mut first = None;
    for &t in t_grid.iter().filter(|&&t| t > 0.0) {
        let a = curve.point_at(space, t);
        let ang = comparison_angle(kappa, t, space.distance(&a, q), pq)?;
        if first.is_none() {
            first = Some(ang);
        }
        rep.margin(best - ang);
        rise = rise.max(ang - best);
        best = best.min(ang);
    }
    let dirs = space.directions_to(p, q);
    let sig = space.sigma(p);
    let bound = dirs.iter().map(|&d| sig.dist(d, xi)).fold(f64::INFINITY, f64::min);
    if let Some(a0) = first {
        rep.metric("initial_angle", a0);
        if bound.is_finite() {
            rep.metric("angle_to_q", bound);
            rep.margin(bound - a0);
        }
    }
    rep.metric("max_rise", rise);
    Ok(rep)
}

/// ϑ(t) = {f(gexp_p(tξ)) − f(p) − λt²/2}/t is non-increasing and starts at
/// d_pf(ξ).
pub fn verify_theta_monotone(
    f: &Expr,
    space: &Space,
    p: &Point,
    xi: f64,
    lambda: f64,
    t_grid: &[f64],
    h: f64,
    tol: f64,
) -> Result<Report> {
    let mut rep = Report::new("theta_monotone", tol);
    let t_max = t_grid.iter().cloned().fold(0.0, f64::max);
    let curve = radial_curve(space, p, xi, 0.0, t_max, h)?;
    let fp = f.eval(space, p);
    let d0 = differential(f, space, p).at(xi);
    rep.metric("theta_zero", d0);
    let mut best = d0;
    for &t in t_grid.iter().filter(|&&t| t > 0.0) {
        let a = curve.point_at(space, t);
        let th = (f.eval(space, &a) - fp - 0.5 * lambda * t * t) / t;
        rep.margin(best - th);
        best = best.min(th);
    }
    Ok(rep)
}

/// Along radial curves from `p` in the `probes` directions, ∠̃_κ p q α(t)
/// (the comparison angle at q, where q ends the minimizing geodesic `pq`)
/// must not decrease, and no probe may touch the interior of `pq`.
pub fn gexp_inverse_check(
    space: &Space,
    p: &Point,
    q: &Point,
    probes: &[f64],
    kappa: f64,
    duration: f64,
    n: usize,
    h: f64,
    tol: f64,
) -> Result<Report> {
    let mut rep = Report::new("gexp_inverse", tol);
    let pq = space.distance(p, q);
    let sig = space.sigma(p);
    let own = space.directions_to(p, q);
    let mut min_excess = f64::INFINITY;
    for &z in probes {
        if own.iter().any(|&d| sig.dist(d, z) < 1e-9) {
            continue;
        }
        let c = radial_curve(space, p, z, kappa, duration, h)?;
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=n {
            let t = duration * k as f64 / n as f64;
            let a = c.point_at(space, t);
            let pa = space.distance(p, &a);
            let qa = space.distance(q, &a);
            let ang = comparison_angle(kappa, pq, pa, qa)?;
            rep.margin(ang - prev);
            prev = prev.max(ang);
            let excess = pa + qa - pq;
            min_excess = min_excess.min(excess);
            if excess <= 1e-12 && qa > tol {
                rep.fail(alloc::format!("probe {z} meets the geodesic at t = {t}"));
            }
        }
    }
    rep.metric("min_excess", min_excess);
    Ok(rep)
}

/// Shortness samples: `|gexp u, gexp v| − d_T(u, v)` for each pair.
pub fn shortness_defects(space: &Space, p: &Point, pairs: &[(TangentVec, TangentVec)], kappa: f64, h: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(pairs.len());
    for (u, v) in pairs {
        let a = gexp_map(space, p, u, kappa, h)?;
        let b = gexp_map(space, p, v, kappa, h)?;
        out.push(space.distance(&a, &b) - tangent_cone_metric(kappa, u, v)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::{PI, TAU};

    #[test]
    fn plane_gexp_is_exponential() {
        let s = Space::cone(TAU).unwrap();
        let p = Point::Polar { r: 1.0, phi: 0.0 };
        let v = TangentVec::new(0.7, 2.0, s.sigma(&p));
        let q = gexp_map(&s, &p, &v, 0.0, 1e-3).unwrap();
        let w = s.log_map(&p, &q);
        assert_relative_eq!(w.norm, 0.7, epsilon = 1e-9);
        assert_relative_eq!(w.angle, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn metrics_degenerate_hinges() {
        let u = TangentVec::new(0.4, 0.0, crate::spaces::Sigma::circle(TAU));
        let v = TangentVec::new(0.9, PI, crate::spaces::Sigma::circle(TAU));
        assert_relative_eq!(tangent_cone_metric(-1.0, &u, &v).unwrap(), 1.3, epsilon = 1e-12);
        let w = TangentVec::new(0.9, 0.0, crate::spaces::Sigma::circle(TAU));
        assert_relative_eq!(tangent_cone_metric(1.0, &u, &w).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn apex_radial_curves_are_rays() {
        let s = Space::cone(1.5 * PI).unwrap();
        let o = Point::Polar { r: 0.0, phi: 0.0 };
        let q = gexp_map(&s, &o, &TangentVec::new(1.3, 2.0, s.sigma(&o)), 0.0, 1e-2).unwrap();
        assert_eq!(q, Point::Polar { r: 1.3, phi: 2.0 });
    }

    #[test]
    fn through_apex_continues_with_reduced_speed() {
        let s = Space::cone(1.5 * PI).unwrap();
        let p = Point::Polar { r: 1.0, phi: 0.0 };
        let o = Point::Polar { r: 0.0, phi: 0.0 };
        let xi = s.directions_to(&p, &o)[0];
        let c = radial_curve(&s, &p, xi, 0.0, 1.5, 1e-3).unwrap();
        assert!(c.events.iter().any(|e| matches!(e, CurveEvent::Vertex { .. })));
        let ends: Vec<Point> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&h| radial_curve(&s, &p, xi, 0.0, 1.5, h).unwrap().end())
            .collect();
        assert!(s.distance(&ends[1], &ends[2]) <= s.distance(&ends[0], &ends[2]) + 1e-12);
        let rep = verify_radial_comparison(&s, &p, xi, &Point::Polar { r: 0.8, phi: 2.5 }, 0.0, &grid(1.5), 1e-3, 1e-6 + 1e-2)
            .unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    fn grid(t: f64) -> Vec<f64> {
        (1..=200).map(|i| t * i as f64 / 200.0).collect()
    }

    #[test]
    fn spherical_domain() {
        let s = Space::spindle(TAU).unwrap();
        let p = Point::Polar { r: 1.0, phi: 0.0 };
        assert!(radial_curve(&s, &p, 0.0, 1.0, 2.0, 1e-2).is_err());
        assert!(radial_curve(&s, &p, 0.0, 1.0, 1.5, 1e-2).is_ok());
    }

    #[test]
    fn theta_starts_at_differential() {
        let s = Space::cone(1.5 * PI).unwrap();
        let p = Point::Polar { r: 0.5, phi: 0.0 };
        let q = Point::Polar { r: 1.0, phi: 3.0 };
        let f = Expr::scaled(0.5, Expr::DistSq(q));
        let rep = verify_theta_monotone(&f, &s, &p, 1.0, 1.0, &grid(1.5), 1e-3, 1e-6).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_relative_eq!(rep.get("theta_zero").unwrap(), differential(&f, &s, &p).at(1.0), epsilon = 1e-15);
    }
}
