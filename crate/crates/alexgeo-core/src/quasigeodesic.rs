//! Quasigeodesics: the equal-split tracer, the convex-curve and
//! pre-quasigeodesic constructions with their entropy, and a checker built on
//! the equivalent characterizations (development convexity, the barrier
//! inequality for ρ_κ∘dist_p, comparison-angle monotonicity and unit speed).

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GeoError, Result};
use crate::flow::{CurveEvent, CurveRecord, Provenance};
use crate::functions::Expr;
use crate::model_plane::{comparison_angle, develop_curve, rho, second_difference_excess};
use crate::radial::{radial_curve, speed_factor};
use crate::report::Report;
use crate::spaces::{Point, Space, StepEvent, TangentVec};
use crate::tangent::{differential, gradient_fast, gradient_polar, milka_polar, polar_check};

/// How a traced curve continues through a cone point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ContinuationRule {
    /// Leave at arc distance θ/2 from the arrival direction on both sides.
    #[default]
    EqualSplit,
}

/// Unit-speed curve that is straight in faces and splits the total angle
/// evenly at cone points. Samples every `h` of arclength and at every vertex
/// hit; stops at the boundary.
pub fn trace_quasigeodesic(space: &Space, p: &Point, xi: f64, length: f64, h: f64) -> Result<CurveRecord> {
    trace_with_rule(space, p, xi, length, h, ContinuationRule::EqualSplit)
}

pub fn trace_with_rule(space: &Space, p: &Point, xi: f64, length: f64, h: f64, rule: ContinuationRule) -> Result<CurveRecord> {
    if !(h > 0.0) || !(length >= 0.0) {
        return Err(GeoError::Domain(alloc::format!("step {h} and length {length} must be positive")));
    }
    let ContinuationRule::EqualSplit = rule;
    let p = space.check_point(p)?;
    let mut rec = CurveRecord::new(Provenance::TracedQg, h, p);
    let mut cur = p;
    let mut dir = space.sigma(&p).normalize(xi);
    rec.right[0] = Some(TangentVec::new(1.0, dir, space.sigma(&p)));
    let mut s = 0.0;
    let mut guard = 0usize;
    while length - s > 1e-14 && guard < 10_000_000 {
        guard += 1;
        let mut next_mark = ((s / h).floor() + 1.0) * h;
        if next_mark - s < 1e-9 * h {
            next_mark += h;
        }
        let want = next_mark.min(length) - s;
        let out = space.step(&cur, dir, want);
        s += out.traveled;
        let sig = space.sigma(&out.end);
        rec.push(s, out.end, Some(TangentVec::new(1.0, out.back_dir, sig)));
        let i = rec.len() - 1;
        cur = out.end;
        match out.event {
            StepEvent::Boundary => {
                rec.events.push(CurveEvent::Boundary { index: i, t: s });
                break;
            }
            StepEvent::Vertex => {
                rec.events.push(CurveEvent::Vertex { index: i, t: s });
                match space.continuation(&cur, out.back_dir) {
                    Some(d) => dir = d,
                    None => {
                        rec.events.push(CurveEvent::Boundary { index: i, t: s });
                        break;
                    }
                }
            }
            StepEvent::None => {
                dir = space.continuation(&cur, out.back_dir).unwrap_or(dir);
            }
        }
        if length - s > 1e-14 {
            rec.right[i] = Some(TangentVec::new(1.0, dir, sig));
        }
    }
    Ok(rec)
}

/// Unit-speed curve through `nodes` along minimizing geodesics.
pub fn geodesic_path(space: &Space, nodes: &[Point], h: f64) -> Result<CurveRecord> {
    let first = nodes.first().ok_or_else(|| GeoError::Domain("empty path".into()))?;
    let mut rec = CurveRecord::new(Provenance::Geodesic, h, space.check_point(first)?);
    let mut s = 0.0;
    for w in nodes.windows(2) {
        let a = space.check_point(&w[0])?;
        let b = space.check_point(&w[1])?;
        let d = space.distance(&a, &b);
        let dir = *space
            .directions_to(&a, &b)
            .first()
            .ok_or_else(|| GeoError::Domain(alloc::format!("no direction from {a:?} to {b:?}")))?;
        let i0 = rec.len() - 1;
        rec.right[i0] = Some(TangentVec::new(1.0, dir, space.sigma(&a)));
        let n = ((d / h).ceil() as usize).max(1);
        for k in 1..=n {
            let out = space.step(&a, dir, d * k as f64 / n as f64);
            let end = if k == n { b } else { out.end };
            let sig = space.sigma(&end);
            rec.push(s + d * k as f64 / n as f64, end, Some(TangentVec::new(1.0, out.back_dir, sig)));
            if k < n {
                let i = rec.len() - 1;
                let fwd = space.directions_to(&end, &b).first().copied().unwrap_or(dir);
                rec.right[i] = Some(TangentVec::new(1.0, fwd, sig));
            }
        }
        s += d;
    }
    Ok(rec)
}

/// Entropy atoms at the joints of a curve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntropyRecord {
    /// `(t, ln|γ⁺(t)| − ln|γ⁻(t)|)` for every joint with a nonzero jump.
    pub atoms: Vec<(f64, f64)>,
    /// Sum of the atoms.
    pub total: f64,
    /// Σ ln|γ⁺(t_i)| − ln|γ⁻(t_{i+1})| over the pieces between samples.
    pub continuous: f64,
    pub resolution: f64,
}

/// Reads the entropy ledger off the one-sided tangents of a curve.
pub fn entropy(curve: &CurveRecord) -> Result<EntropyRecord> {
    let n = curve.len();
    let mut atoms = Vec::new();
    let mut cont = 0.0;
    let stop = curve.events.iter().find_map(|e| match e {
        CurveEvent::Stop { index, .. } => Some(*index),
        _ => None,
    });
    let last = stop.unwrap_or(n - 1);
    for i in 0..last {
        let r = curve.right[i].ok_or_else(|| GeoError::Domain(alloc::format!("missing right tangent at sample {i}")))?;
        let l = curve.left[i + 1].ok_or_else(|| GeoError::Domain(alloc::format!("missing left tangent at sample {}", i + 1)))?;
        if r.norm > 0.0 && l.norm > 0.0 {
            cont += r.norm.ln() - l.norm.ln();
        }
        if i + 1 < last {
            let rn = curve.right[i + 1].map(|v| v.norm).unwrap_or(0.0);
            if rn > 0.0 && l.norm > 0.0 {
                let jump = rn.ln() - l.norm.ln();
                if jump.abs() > 1e-15 {
                    atoms.push((curve.t[i + 1], jump));
                }
            }
        }
    }
    let total = atoms.iter().map(|a| a.1).sum();
    Ok(EntropyRecord { atoms, total, continuous: cont, resolution: curve.h })
}

/// Velocity of the radial curve from `base` at time `t` through `at`:
/// m_κ(|base at|, t)·∇dist_base.
fn radial_velocity(space: &Space, base: &Point, at: &Point, t: f64) -> Result<TangentVec> {
    let g = gradient_fast(&Expr::Dist(*base), space, at)?;
    let m = speed_factor(0.0, space.distance(base, at), t);
    Ok(g.scale(m.min(1.0)))
}

/// β_{ξ,ε}: joints of radial curves α_{v_n} of parameter length ε with
/// v_0 = ξ and v_{n+1} = α⁺_{v_n}(ε). Returns the curve on [0, T].
pub fn build_convex_curve(space: &Space, p: &Point, xi: f64, eps: f64, duration: f64, h: f64) -> Result<CurveRecord> {
    convex_from(space, p, TangentVec::new(1.0, xi, space.sigma(p)), eps, duration, h)
}

fn convex_from(space: &Space, p: &Point, v0: TangentVec, eps: f64, duration: f64, h: f64) -> Result<CurveRecord> {
    if !(eps > 0.0) || !(h > 0.0) {
        return Err(GeoError::Domain(alloc::format!("eps {eps} and step {h} must be positive")));
    }
    let p = space.check_point(p)?;
    let mut rec = CurveRecord::new(Provenance::User, h, p);
    let mut base = p;
    let mut v = v0;
    let mut t0 = 0.0;
    while duration - t0 > 1e-14 {
        let idx = rec.len() - 1;
        if v.norm < 1e-12 {
            rec.right[idx] = Some(TangentVec::origin(v.sigma));
            rec.events.push(CurveEvent::Stop { index: idx, t: t0 });
            rec.push(duration, base, None);
            break;
        }
        let span = eps.min(duration - t0);
        let seg = radial_curve(space, &base, v.angle, 0.0, span * v.norm, h.min(span * v.norm))?;
        for k in 0..seg.len() {
            let tt = t0 + seg.t[k] / v.norm;
            if k == 0 {
                rec.right[idx] = seg.right[0].map(|u| u.scale(v.norm));
                continue;
            }
            rec.push(tt, seg.points[k], seg.left[k].map(|u| u.scale(v.norm)));
            let i = rec.len() - 1;
            rec.right[i] = seg.right[k].map(|u| u.scale(v.norm));
            for e in &seg.events {
                if let CurveEvent::Vertex { index, .. } = e {
                    if *index == k {
                        rec.events.push(CurveEvent::Vertex { index: i, t: tt });
                    }
                }
            }
        }
        let end = seg.end();
        let w = radial_velocity(space, &base, &end, span * v.norm)?;
        v = w.scale(v.norm);
        base = end;
        t0 += span;
        let i = rec.len() - 1;
        rec.t[i] = t0;
        rec.right[i] = if duration - t0 > 1e-14 { Some(v) } else { None };
    }
    Ok(rec)
}

/// The speed-controlled construction: on each interval [a, ā) of length at
/// most ε the curve follows β_v(s) = β_{ξ_v}(|v|s) while its speed stays
/// above (1−ε)|v|; at ā the new velocity is the polar vector |γ⁻|·∇_o dist_{ξ⁻}
/// of the left tangent, whose norm may drop. Each joint contributes the atom
/// ln|γ⁺| − ln|γ⁻|.
pub fn build_prequasigeodesic(space: &Space, p: &Point, xi: f64, eps: f64, duration: f64, h: f64) -> Result<(CurveRecord, EntropyRecord)> {
    if !(eps > 0.0 && eps < 1.0) || !(h > 0.0) {
        return Err(GeoError::Domain(alloc::format!("eps {eps} must lie in (0, 1) and step {h} be positive")));
    }
    let p = space.check_point(p)?;
    let mut rec = CurveRecord::new(Provenance::User, h, p);
    let mut v = TangentVec::new(1.0, xi, space.sigma(&p));
    let mut a = 0.0;
    let mut atoms = Vec::new();
    let mut cur = p;
    while duration - a > 1e-14 {
        let idx = rec.len() - 1;
        if v.norm < 1e-12 {
            rec.right[idx] = Some(TangentVec::origin(v.sigma));
            rec.events.push(CurveEvent::Stop { index: idx, t: a });
            rec.push(duration, cur, None);
            break;
        }
        let span = eps.min(duration - a);
        let beta = convex_from(space, &cur, v.scale(1.0 / v.norm), eps, span * v.norm, h)?;
        let floor = (1.0 - eps) * v.norm;
        rec.right[idx] = Some(v);
        let mut end_k = beta.len() - 1;
        for k in 1..beta.len() {
            let speed = beta.right[k].map(|u| u.norm * v.norm);
            if let Some(sp) = speed {
                if sp < floor {
                    end_k = k;
                    break;
                }
            }
        }
        for k in 1..=end_k {
            let tt = a + beta.t[k] / v.norm;
            rec.push(tt, beta.points[k], beta.left[k].map(|u| u.scale(v.norm)));
            if k < end_k {
                let i = rec.len() - 1;
                rec.right[i] = beta.right[k].map(|u| u.scale(v.norm));
            }
        }
        let i = rec.len() - 1;
        a = rec.t[i];
        cur = rec.points[i];
        if duration - a <= 1e-14 {
            break;
        }
        let left = rec.left[i].ok_or_else(|| GeoError::Invariant("joint without a left tangent".into()))?;
        let star = gradient_polar(&left);
        if star.norm > 0.0 && left.norm > 0.0 {
            let jump = star.norm.ln() - left.norm.ln();
            if jump.abs() > 1e-15 {
                atoms.push((a, jump));
            }
        }
        v = star;
        rec.right[i] = Some(v);
    }
    let total = atoms.iter().map(|x| x.1).sum();
    let mut ent = entropy(&rec)?;
    ent.atoms = atoms;
    ent.total = total;
    Ok((rec, ent))
}

/// Settings for [`check_quasigeodesic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QgCheckOptions {
    pub n_probes: usize,
    pub tol: f64,
    pub seed: u64,
    /// Uniform resampling count when the curve carries tangents.
    pub n_resample: usize,
    /// Probes closer than this to the curve are skipped for developments.
    pub min_probe_distance: f64,
}

impl Default for QgCheckOptions {
    fn default() -> Self {
        QgCheckOptions { n_probes: 20, tol: 1e-6, seed: 0, n_resample: 400, min_probe_distance: 1e-6 }
    }
}

fn resample(space: &Space, curve: &CurveRecord, n: usize) -> Vec<(f64, Point)> {
    let n_tan = curve.right.iter().take(curve.len().saturating_sub(1)).filter(|r| r.is_some()).count();
    if n_tan + 1 < curve.len() || n < 2 {
        return curve.t.iter().cloned().zip(curve.points.iter().cloned()).collect();
    }
    let total = curve.duration();
    (0..=n).map(|k| {
        let t = total * k as f64 / n as f64;
        (t, curve.point_at(space, t))
    })
    .collect()
}

/// Runs the four quasigeodesic tests against random probes.
pub fn check_quasigeodesic(space: &Space, curve: &CurveRecord, opts: &QgCheckOptions) -> Report {
    let kappa = space.kappa();
    let mut rep = Report::new("quasigeodesic", opts.tol);
    let samples = resample(space, curve, opts.n_resample);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut speed: f64 = 0.0;
    let mut unit = Report::new("unit_speed", opts.tol);
    let interior = curve.len().saturating_sub(1);
    for k in 0..interior {
        if let Some(r) = curve.right[k] {
            speed = speed.max((r.norm - 1.0).abs());
            unit.margin(-(r.norm - 1.0).abs());
        }
        if let Some(l) = curve.left[k + 1] {
            speed = speed.max((l.norm - 1.0).abs());
            unit.margin(-(l.norm - 1.0).abs());
        }
    }
    for w in samples.windows(2) {
        let dt = w[1].0 - w[0].0;
        if dt > 0.0 {
            unit.margin(1.0 - space.distance(&w[0].1, &w[1].1) / dt);
        }
    }
    rep.metric("speed_defect", speed);

    let mut barrier = Report::new("barrier", opts.tol);
    let mut angle = Report::new("comparison", opts.tol);
    let mut devel = Report::new("development", opts.tol);
    let mut min_turn = f64::INFINITY;
    let n = samples.len();
    for _ in 0..opts.n_probes {
        let q = space.sample_point(&mut rng);
        let r: Vec<f64> = samples.iter().map(|(_, x)| space.distance(&q, x)).collect();
        for k in 1..n.saturating_sub(1) {
            let d1 = samples[k].0 - samples[k - 1].0;
            let d2 = samples[k + 1].0 - samples[k].0;
            if !(d1 > 0.0) || (d1 - d2).abs() > 1e-9 * d1.max(1.0) {
                continue;
            }
            let h = |x: f64| rho(kappa, x);
            let ex = second_difference_excess(kappa, 1.0, d1, h(r[k - 1]), h(r[k]), h(r[k + 1]));
            barrier.margin(-ex * d1 * d1);
        }
        for &s0 in &[0, n / 3, 2 * n / 3] {
            let mut best = f64::INFINITY;
            for j in s0 + 1..n {
                let t = samples[j].0 - samples[s0].0;
                if kappa > 0.0 && t > PI {
                    break;
                }
                if let Ok(a) = comparison_angle(kappa, r[s0], r[j], t) {
                    angle.margin(best - a);
                    best = best.min(a);
                }
            }
        }
        if let Some(v) = curve.right[0] {
            let dirs = space.directions_to(&curve.points[0], &q);
            if let Some(ang) = dirs.iter().map(|&d| v.sigma.dist(d, v.angle)).reduce(f64::min) {
                for j in 1..n {
                    if let Ok(a) = comparison_angle(kappa, r[0], r[j], samples[j].0) {
                        angle.margin(ang - a);
                    }
                }
            }
        }
        if r.iter().cloned().fold(f64::INFINITY, f64::min) < opts.min_probe_distance {
            continue;
        }
        let prof: Vec<(f64, f64)> = samples.iter().map(|s| s.0).zip(r.iter().cloned()).collect();
        if let Ok(dev) = develop_curve(kappa, &prof, opts.tol) {
            let m = dev.min_turn();
            if m.is_finite() {
                min_turn = min_turn.min(m);
                devel.margin(m);
            }
        }
    }
    rep.metric("min_turn", min_turn);
    rep.metric("barrier_worst", -barrier.worst_margin);
    rep.metric("comparison_worst", -angle.worst_margin);
    for (name, part) in [("unit_speed", &unit), ("barrier", &barrier), ("comparison", &angle), ("development", &devel)] {
        if !part.passed {
            rep.note(alloc::format!("{name} failed, worst margin {:e}", part.worst_margin));
        }
        rep.absorb(part);
    }
    rep
}

/// Convexity of a curve with respect to concave functions: for each f in `funcs`
/// (λ-concave with the paired λ ≥ 0), t ↦ f(β(t)) − λt²/2 is concave.
pub fn check_convex_curve(space: &Space, curve: &CurveRecord, funcs: &[(Expr, f64)], n: usize, tol: f64) -> Report {
    let mut rep = Report::new("convex_curve", tol);
    let samples = resample(space, curve, n);
    let mut lip: f64 = 0.0;
    for w in samples.windows(2) {
        let dt = w[1].0 - w[0].0;
        if dt > 0.0 {
            let r = space.distance(&w[0].1, &w[1].1) / dt;
            lip = lip.max(r);
            rep.margin(1.0 + tol - r);
        }
    }
    for (f, lambda) in funcs {
        let vals: Vec<f64> = samples.iter().map(|(_, x)| f.eval(space, x)).collect();
        for k in 1..samples.len().saturating_sub(1) {
            let d1 = samples[k].0 - samples[k - 1].0;
            let d2 = samples[k + 1].0 - samples[k].0;
            if !(d1 > 0.0) || (d1 - d2).abs() > 1e-9 * d1.max(1.0) {
                continue;
            }
            let ex = second_difference_excess(0.0, *lambda, d1, vals[k - 1], vals[k], vals[k + 1]);
            rep.margin(-ex * d1 * d1);
        }
    }
    rep.metric("lipschitz", lip);
    rep
}

/// One extend-then-chop cycle: a pre-quasigeodesic piece of length ε is
/// extended through its end with the equal-norm polar vector (zero atom),
/// then chopped at the first t̄ = t + ε·2^{−k} with
/// μ((t, t̄)) < ε[θ + t̄ − t] and θ < ε. On the chopped piece the inequality
/// d_pf(ξ) − d_pf(ν) ≤ (f∘γ)⁺(0) − (f∘γ)⁻(t̄ − t) + λ(t̄ − t) is checked for
/// f = ½dist_q² (λ = 1) over random q with d_pf(ν) ≥ 0.
pub fn chop_extend_demo(space: &Space, p: &Point, xi: f64, eps: f64, h: f64, seed: u64) -> Result<Report> {
    let mut rep = Report::new("chop_extend", 1e-6);
    let (piece, _) = build_prequasigeodesic(space, p, xi, eps, eps, h)?;
    let i = piece.len() - 1;
    let t = piece.t[i];
    let x = piece.points[i];
    let left = piece.left[i].ok_or_else(|| GeoError::Domain("piece has no left tangent at its end".into()))?;
    let star = milka_polar(&left);
    let pol = polar_check(&left, &star, 1e-9);
    rep.absorb(&pol);
    let atom = star.norm.ln() - left.norm.ln();
    rep.metric("extension_atom", atom);
    rep.margin(-atom.abs());
    let (ext, _) = build_prequasigeodesic(space, &x, star.angle, eps, eps, h)?;
    let speed0 = star.norm;
    let mu = |k: usize| -> Option<f64> {
        let r = ext.right[0]?.norm * speed0;
        let l = ext.left[k]?.norm * speed0;
        Some(r.ln() - l.ln())
    };
    let mut chosen = None;
    for j in 1..30 {
        let tau = eps * 0.5f64.powi(j);
        let Some(k) = ext.t.iter().position(|&s| s >= tau - 1e-12) else { continue };
        if k == 0 {
            break;
        }
        let y = ext.points[k];
        let dirs = space.directions_to(&x, &y);
        let Some(th) = dirs.iter().map(|&d| star.sigma.dist(d, star.angle)).reduce(f64::min) else { continue };
        let Some(m) = mu(k) else { continue };
        let dt = ext.t[k];
        if m < eps * (th + dt) && th < eps && dt < eps {
            chosen = Some((k, th, m, dt));
            break;
        }
    }
    let Some((k, th, m, dt)) = chosen else {
        rep.fail("no chopping point found");
        return Ok(rep);
    };
    rep.metric("t", t);
    rep.metric("t_bar", t + dt);
    rep.metric("theta", th);
    rep.metric("mu", m);
    rep.margin(eps * (th + dt) - m);

    let y = ext.points[k];
    let nu = space.directions_to(&x, &y)[0];
    let xi_u = star.angle;
    let left_y = ext.left[k].ok_or_else(|| GeoError::Domain("missing left tangent".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tested = 0;
    for _ in 0..200 {
        let q = space.sample_point(&mut rng);
        let f = Expr::scaled(0.5, Expr::DistSq(q));
        let dx = differential(&f, space, &x);
        if dx.at(nu) < 0.0 {
            continue;
        }
        tested += 1;
        let dy = differential(&f, space, &y);
        let right0 = dx.at(xi_u);
        let left_t = -dy.at_vec(&left_y.scale(1.0 / ext.right[0].map(|v| v.norm).unwrap_or(1.0)));
        rep.margin(right0 - left_t + dt - (dx.at(xi_u) - dx.at(nu)));
    }
    rep.metric("lemma_samples", tested as f64);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::TAU;

    #[test]
    fn apex_equal_split_on_three_halves_cone() {
        let s = Space::cone(1.5 * PI).unwrap();
        let p = Point::Polar { r: 1.0, phi: 0.2 };
        let dir = s.directions_to(&p, &Point::Polar { r: 0.0, phi: 0.0 })[0];
        let c = trace_quasigeodesic(&s, &p, dir, 2.0, 0.01).unwrap();
        let Point::Polar { r, phi } = c.end() else { panic!() };
        assert_relative_eq!(r, 1.0, epsilon = 1e-9);
        assert_relative_eq!(phi, 0.2 + 0.75 * PI, epsilon = 1e-9);
        let rep = check_quasigeodesic(&s, &c, &QgCheckOptions::default());
        assert!(rep.passed, "{rep:?}");
        assert_eq!(entropy(&c).unwrap().total, 0.0);
    }

    #[test]
    fn planar_corner_fails_development() {
        let s = Space::cone(TAU).unwrap();
        let nodes = [
            Point::Plane { x: 0.0, y: 0.0 },
            Point::Plane { x: 1.0, y: 0.0 },
            Point::Plane { x: 1.0 + 2.0f64.cos(), y: 2.0f64.sin() },
        ];
        let nodes: Vec<Point> = nodes
            .iter()
            .map(|q| match q {
                Point::Plane { x, y } => Point::Polar { r: x.hypot(*y), phi: y.atan2(*x).rem_euclid(TAU) },
                q => *q,
            })
            .collect();
        let c = geodesic_path(&s, &nodes, 0.01).unwrap();
        let rep = check_quasigeodesic(&s, &c, &QgCheckOptions::default());
        assert!(!rep.passed);
    }

    #[test]
    fn plane_geodesic_passes() {
        let s = Space::cone(TAU).unwrap();
        let c = trace_quasigeodesic(&s, &Point::Polar { r: 1.0, phi: 1.0 }, 0.5, 3.0, 0.01).unwrap();
        let rep = check_quasigeodesic(&s, &c, &QgCheckOptions { tol: 1e-9, ..Default::default() });
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn square_boundary_path() {
        let s = Space::polygon(alloc::vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let nodes = [
            Point::Plane { x: 0.3, y: 0.0 },
            Point::Plane { x: 1.0, y: 0.0 },
            Point::Plane { x: 1.0, y: 1.0 },
            Point::Plane { x: 0.6, y: 1.0 },
        ];
        let c = geodesic_path(&s, &nodes, 0.01).unwrap();
        let rep = check_quasigeodesic(&s, &c, &QgCheckOptions::default());
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn entropy_of_a_half_speed_joint() {
        let sig = crate::spaces::Sigma::circle(TAU);
        let mut c = CurveRecord::new(Provenance::User, 0.1, Point::Plane { x: 0.0, y: 0.0 });
        c.right[0] = Some(TangentVec::new(1.0, 0.0, sig));
        c.push(0.1, Point::Plane { x: 0.1, y: 0.0 }, Some(TangentVec::new(1.0, PI, sig)));
        c.right[1] = Some(TangentVec::new(0.5, 0.0, sig));
        c.push(0.2, Point::Plane { x: 0.15, y: 0.0 }, Some(TangentVec::new(0.5, PI, sig)));
        let e = entropy(&c).unwrap();
        assert_eq!(e.atoms.len(), 1);
        assert_relative_eq!(e.total, 0.5f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn plane_builders_are_straight() {
        let s = Space::cone(TAU).unwrap();
        let p = Point::Polar { r: 1.0, phi: 0.0 };
        for eps in [0.1, 0.05] {
            let b = build_convex_curve(&s, &p, 1.0, eps, 1.0, 1e-2).unwrap();
            let end = trace_quasigeodesic(&s, &p, 1.0, 1.0, 0.1).unwrap().end();
            assert!(s.distance(&b.end(), &end) < 1e-9);
            let (g, e) = build_prequasigeodesic(&s, &p, 1.0, eps, 1.0, 1e-2).unwrap();
            assert!(s.distance(&g.end(), &end) < 1e-9);
            assert_eq!(e.total, 0.0);
        }
    }

    #[test]
    fn apex_prequasigeodesic_records_lemma_polar_atom() {
        let s = Space::cone(1.5 * PI).unwrap();
        let p = Point::Polar { r: 0.5, phi: 0.0 };
        let dir = s.directions_to(&p, &Point::Polar { r: 0.0, phi: 0.0 })[0];
        let (_, e) = build_prequasigeodesic(&s, &p, dir, 0.1, 1.0, 1e-3).unwrap();
        assert_relative_eq!(e.total, 0.5f64.sqrt().ln(), epsilon = 1e-6);
    }

    #[test]
    fn chop_extend_cycle() {
        let s = Space::cone(1.5 * PI).unwrap();
        let rep = chop_extend_demo(&s, &Point::Polar { r: 1.0, phi: 0.0 }, 2.0, 0.1, 1e-3, 1).unwrap();
        assert!(rep.passed, "{rep:?}");
    }
}
