//! Spherical caps `{r ≤ r0}` on the unit sphere and their doubles.
//!
//! Interior directions are measured counter-clockwise from the outward radial
//! direction; at the pole a direction is the longitude of the ray. At a
//! boundary point Σ is the arc `[0, π]` with coordinate `s = β − π/2`.

use crate::ext::RemEuclid;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};
use num_traits::Float;

use super::cone::APEX_SNAP;
use super::{dedupe_circle, wrap_signed, Point, Sigma, StepEvent, StepOutcome};
use crate::error::{GeoError, Result};

type V3 = [f64; 3];

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn comb(a: f64, u: V3, b: f64, v: V3) -> V3 {
    [a * u[0] + b * v[0], a * u[1] + b * v[1], a * u[2] + b * v[2]]
}

fn xyz(r: f64, phi: f64) -> V3 {
    let (sr, cr) = r.sin_cos();
    let (sf, cf) = phi.sin_cos();
    [sr * cf, sr * sf, cr]
}

fn rphi(x: V3) -> (f64, f64) {
    let rho = x[0].hypot(x[1]);
    (rho.atan2(x[2]), x[1].atan2(x[0]).rem_euclid(TAU))
}

fn is_pole(r: f64) -> bool {
    r <= APEX_SNAP || r >= PI - APEX_SNAP
}

fn frame(r: f64, phi: f64) -> (V3, V3) {
    let (sr, cr) = r.sin_cos();
    let (sf, cf) = phi.sin_cos();
    ([cr * cf, cr * sf, -sr], [-sf, cf, 0.0])
}

/// Unit tangent at `(r, φ)` for the direction coordinate `a`.
fn dir_vec(r: f64, phi: f64, a: f64) -> V3 {
    let (sa, ca) = a.sin_cos();
    if is_pole(r) {
        [ca, sa, 0.0]
    } else {
        let (er, ef) = frame(r, phi);
        comb(ca, er, sa, ef)
    }
}

/// Direction coordinate at `(r, φ)` of the tangent `t`.
fn vec_dir(r: f64, phi: f64, t: V3) -> f64 {
    if is_pole(r) {
        t[1].atan2(t[0]).rem_euclid(TAU)
    } else {
        let (er, ef) = frame(r, phi);
        dot(t, ef).atan2(dot(t, er)).rem_euclid(TAU)
    }
}

fn sphere_distance(r1: f64, f1: f64, r2: f64, f2: f64) -> f64 {
    let a = wrap_signed(f2 - f1, TAU).abs();
    let hd = ((r1 - r2) / 2.0).sin();
    let ha = (a / 2.0).sin();
    let x = (hd * hd + r1.sin() * r2.sin() * ha * ha).clamp(0.0, 1.0);
    2.0 * x.sqrt().atan2((1.0 - x).sqrt())
}

/// Direction coordinates at p of the great-circle arcs to q.
fn sphere_directions(r1: f64, f1: f64, r2: f64, f2: f64) -> Vec<f64> {
    let p = xyz(r1, f1);
    let q = xyz(r2, f2);
    let c = dot(p, q);
    let w = comb(1.0, q, -c, p);
    let n = dot(w, w).sqrt();
    if n < 1e-14 {
        return Vec::new();
    }
    vec![vec_dir(r1, f1, w)]
}

/// Moves along a great circle until `len` or until `r` reaches `r0`.
/// Returns the end point, traveled length, back direction coordinate and
/// whether the boundary was hit.
fn cap_walk(r0: f64, r: f64, phi: f64, a: f64, len: f64) -> ((f64, f64), f64, f64, bool) {
    let p = xyz(r, phi);
    let u = dir_vec(r, phi, a);
    let c = r0.cos();
    let big = FRAC_PI_2 >= r0 - 1e-15 && r0 >= FRAC_PI_2 - 1e-15;
    let amp = p[2].hypot(u[2]);
    let s_exit = if amp < 1e-15 {
        if p[2] >= c - 1e-12 {
            f64::INFINITY
        } else {
            0.0
        }
    } else if p[2] <= c + 1e-13 && u[2] < -1e-13 {
        0.0
    } else if big && p[2].abs() <= 1e-13 && u[2].abs() <= 1e-13 {
        f64::INFINITY
    } else {
        let delta = u[2].atan2(p[2]);
        let alpha = (c / amp).clamp(-1.0, 1.0).acos();
        let s = (delta + alpha).rem_euclid(TAU);
        if s > TAU - 1e-13 {
            0.0
        } else {
            s
        }
    };
    let (s, hit) = if len < s_exit { (len, false) } else { (s_exit, true) };
    let (ss, cs) = s.sin_cos();
    let x = comb(cs, p, ss, u);
    let t = comb(-ss, p, cs, u);
    let (mut nr, nf) = rphi(x);
    if hit {
        nr = r0;
    }
    let nr = nr.min(r0);
    let back = vec_dir(nr, nf, [-t[0], -t[1], -t[2]]);
    ((nr, nf), s, back, hit)
}

/// The cap `{r ≤ r0}` of the unit sphere, `r0 ∈ (0, π/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cap {
    pub r0: f64,
}

fn polar(p: &Point) -> (f64, f64) {
    match *p {
        Point::Polar { r, phi } => (r, phi),
        Point::Sheet { r, phi, .. } => (r, phi),
        _ => (f64::NAN, f64::NAN),
    }
}

fn check_r0(r0: f64) -> Result<()> {
    if !(r0 > 0.0 && r0 <= FRAC_PI_2 * (1.0 + 1e-12)) {
        return Err(GeoError::InvalidSpace(alloc::format!("cap radius {r0} must lie in (0, π/2]")));
    }
    Ok(())
}

impl Cap {
    pub fn new(r0: f64) -> Result<Self> {
        check_r0(r0)?;
        Ok(Cap { r0: r0.min(FRAC_PI_2) })
    }

    fn on_boundary(&self, r: f64) -> bool {
        r >= self.r0 - 1e-12
    }

    pub fn check_point(&self, p: &Point) -> Result<Point> {
        match *p {
            Point::Polar { r, phi } if r >= 0.0 && phi.is_finite() => {
                if r > self.r0 + 1e-9 {
                    return Err(GeoError::InvalidPoint(alloc::format!("r = {r} lies outside the cap")));
                }
                Ok(Point::Polar { r: r.min(self.r0), phi: phi.rem_euclid(TAU) })
            }
            _ => Err(GeoError::InvalidPoint("cap point needs polar coordinates with r ≥ 0".into())),
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let (r1, f1) = polar(p);
        let (r2, f2) = polar(q);
        sphere_distance(r1, f1, r2, f2)
    }

    pub fn sigma(&self, p: &Point) -> Sigma {
        let (r, _) = polar(p);
        if self.on_boundary(r) {
            Sigma::arc(PI)
        } else {
            Sigma::circle(TAU)
        }
    }

    fn to_coord(&self, r: f64, beta: f64) -> f64 {
        if self.on_boundary(r) {
            (beta - FRAC_PI_2).rem_euclid(TAU).clamp(0.0, PI)
        } else {
            beta.rem_euclid(TAU)
        }
    }

    fn from_coord(&self, r: f64, a: f64) -> f64 {
        if self.on_boundary(r) {
            a + FRAC_PI_2
        } else {
            a
        }
    }

    pub fn directions_to(&self, p: &Point, q: &Point) -> Vec<f64> {
        let (r1, f1) = polar(p);
        let (r2, f2) = polar(q);
        if self.distance(p, q) == 0.0 {
            return Vec::new();
        }
        let dirs = sphere_directions(r1, f1, r2, f2);
        if dirs.is_empty() {
            // Antipodal boundary points of a hemisphere: every half great circle.
            return Sigma::arc(PI).grid(181);
        }
        dirs.into_iter().map(|b| self.to_coord(r1, b)).collect()
    }

    pub fn step(&self, p: &Point, dir: f64, len: f64) -> StepOutcome {
        let (r, phi) = polar(p);
        let beta = self.from_coord(r, dir);
        let ((nr, nf), s, back, hit) = cap_walk(self.r0, r, phi, beta, len);
        StepOutcome {
            end: Point::Polar { r: nr, phi: nf },
            traveled: s,
            back_dir: self.to_coord(nr, back),
            event: if hit { StepEvent::Boundary } else { StepEvent::None },
        }
    }

    /// Moves along the boundary circle from a boundary point whose direction
    /// is tangent to it (coordinate 0 or π). None elsewhere.
    pub fn slide(&self, p: &Point, dir: f64, len: f64) -> Option<StepOutcome> {
        let (r, phi) = polar(p);
        if !self.on_boundary(r) {
            return None;
        }
        let sign = if dir <= 1e-7 {
            1.0
        } else if dir >= PI - 1e-7 {
            -1.0
        } else {
            return None;
        };
        let nf = (phi + sign * len / self.r0.sin()).rem_euclid(TAU);
        Some(StepOutcome {
            end: Point::Polar { r: self.r0, phi: nf },
            traveled: len,
            back_dir: if sign > 0.0 { PI } else { 0.0 },
            event: StepEvent::None,
        })
    }

    /// Distance to the boundary circle and the inward normal directions.
    pub fn boundary_feet(&self, p: &Point) -> (f64, Vec<f64>) {
        let (r, _) = polar(p);
        let d = (self.r0 - r).max(0.0);
        if r <= APEX_SNAP {
            (d, Sigma::circle(TAU).grid(360))
        } else {
            (d, vec![self.to_coord(r, PI)])
        }
    }
}

/// Two copies of a cap glued along the boundary circle.
///
/// Sheet 1 carries the mirrored orientation: crossing the seam maps the
/// direction `β` to `π − β`. Seam points are stored on sheet 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledCap {
    pub r0: f64,
}

fn sheet(p: &Point) -> (u8, f64, f64) {
    match *p {
        Point::Sheet { sheet, r, phi } => (sheet, r, phi),
        Point::Polar { r, phi } => (0, r, phi),
        _ => (0, f64::NAN, f64::NAN),
    }
}

impl DoubledCap {
    pub fn new(r0: f64) -> Result<Self> {
        check_r0(r0)?;
        Ok(DoubledCap { r0: r0.min(FRAC_PI_2) })
    }

    fn hemisphere(&self) -> bool {
        self.r0 >= FRAC_PI_2 - 1e-15
    }

    fn seam(&self, r: f64) -> bool {
        r >= self.r0 - 1e-12
    }

    fn canon(&self, s: u8, r: f64, phi: f64) -> Point {
        if self.seam(r) {
            Point::Sheet { sheet: 0, r: self.r0, phi: phi.rem_euclid(TAU) }
        } else {
            Point::Sheet { sheet: s, r, phi: phi.rem_euclid(TAU) }
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<Point> {
        let (s, r, phi) = sheet(p);
        if !(s <= 1 && r >= 0.0 && r <= self.r0 + 1e-9 && phi.is_finite()) {
            return Err(GeoError::InvalidPoint("doubled cap point needs sheet 0/1 and 0 ≤ r ≤ r0".into()));
        }
        Ok(self.canon(s, r.min(self.r0), phi))
    }

    /// Embedding of the doubled hemisphere as the round sphere.
    fn sphere_coords(s: u8, r: f64, phi: f64) -> (f64, f64) {
        if s == 1 {
            (PI - r, phi)
        } else {
            (r, phi)
        }
    }

    fn via_seam(&self, r1: f64, f1: f64, r2: f64, f2: f64, fb: f64) -> f64 {
        sphere_distance(r1, f1, self.r0, fb) + sphere_distance(self.r0, fb, r2, f2)
    }

    /// Longitude of the best seam crossing and the resulting length.
    fn best_seam(&self, r1: f64, f1: f64, r2: f64, f2: f64) -> (f64, f64) {
        let n = 720;
        let mut best = (0.0, f64::INFINITY);
        for i in 0..n {
            let fb = TAU * i as f64 / n as f64;
            let v = self.via_seam(r1, f1, r2, f2, fb);
            if v < best.1 {
                best = (fb, v);
            }
        }
        let h = TAU / n as f64;
        let (mut a, mut b) = (best.0 - h, best.0 + h);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = self.via_seam(r1, f1, r2, f2, c);
        let mut fd = self.via_seam(r1, f1, r2, f2, d);
        for _ in 0..80 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = self.via_seam(r1, f1, r2, f2, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = self.via_seam(r1, f1, r2, f2, d);
            }
        }
        let fb = (a + b) / 2.0;
        let v = self.via_seam(r1, f1, r2, f2, fb);
        if v < best.1 {
            (fb, v)
        } else {
            best
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let (s1, r1, f1) = sheet(p);
        let (s2, r2, f2) = sheet(q);
        if s1 == s2 || self.seam(r1) || self.seam(r2) {
            return sphere_distance(r1, f1, r2, f2);
        }
        if self.hemisphere() {
            let (a, b) = Self::sphere_coords(s1, r1, f1);
            let (c, d) = Self::sphere_coords(s2, r2, f2);
            return sphere_distance(a, b, c, d);
        }
        self.best_seam(r1, f1, r2, f2).1
    }

    pub fn sigma(&self, _p: &Point) -> Sigma {
        Sigma::circle(TAU)
    }

    /// Converts a direction from the sheet-`s` frame to the stored frame.
    fn mirror(s: u8, r: f64, beta: f64) -> f64 {
        if s == 1 && !is_pole(r) {
            (PI - beta).rem_euclid(TAU)
        } else {
            beta.rem_euclid(TAU)
        }
    }

    pub fn directions_to(&self, p: &Point, q: &Point) -> Vec<f64> {
        let (s1, r1, f1) = sheet(p);
        let (s2, r2, f2) = sheet(q);
        if self.distance(p, q) == 0.0 {
            return Vec::new();
        }
        if self.hemisphere() {
            let (a, b) = Self::sphere_coords(s1, r1, f1);
            let (c, d) = Self::sphere_coords(s2, r2, f2);
            let dirs = sphere_directions(a, b, c, d);
            if dirs.is_empty() {
                return Sigma::circle(TAU).grid(360);
            }
            return dirs.into_iter().map(|x| Self::mirror(s1, r1, x)).collect();
        }
        let seam_p = self.seam(r1);
        if s1 == s2 || seam_p || self.seam(r2) {
            let dirs = sphere_directions(r1, f1, r2, f2);
            let own = if seam_p { s2 } else { s1 };
            return dedupe_circle(dirs.into_iter().map(|x| Self::mirror(own, r1, x)).collect(), TAU);
        }
        let (fb, _) = self.best_seam(r1, f1, r2, f2);
        let dirs = sphere_directions(r1, f1, self.r0, fb);
        dirs.into_iter().map(|x| Self::mirror(s1, r1, x)).collect()
    }

    pub fn step(&self, p: &Point, dir: f64, len: f64) -> StepOutcome {
        let (mut s, mut r, mut phi) = sheet(p);
        let mut beta = dir;
        if self.seam(r) {
            s = 0;
            r = self.r0;
            if beta.cos() > 0.0 {
                s = 1;
                beta = PI - beta;
            }
        } else if s == 1 && !is_pole(r) {
            beta = PI - beta;
        }
        let mut left = len;
        let mut traveled = 0.0;
        let mut back;
        let mut stalls = 0;
        loop {
            let ((nr, nf), t, b, hit) = cap_walk(self.r0, r, phi, beta, left);
            traveled += t;
            left -= t;
            r = nr;
            phi = nf;
            back = b;
            if !hit || left <= 1e-15 {
                break;
            }
            if t <= 1e-15 {
                stalls += 1;
            } else {
                stalls = 0;
            }
            let fwd = b + PI;
            beta = PI - fwd;
            s = 1 - s;
            if stalls >= 2 {
                beta += if s == 0 { 1e-9 } else { -1e-9 };
                stalls = 0;
            }
        }
        let end = self.canon(s, r, phi);
        let back_dir = if self.seam(r) {
            if s == 1 {
                (PI - back).rem_euclid(TAU)
            } else {
                back
            }
        } else {
            Self::mirror(s, r, back)
        };
        StepOutcome { end, traveled, back_dir, event: StepEvent::None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cap_step_hits_boundary() {
        let c = Cap::new(1.0).unwrap();
        let out = c.step(&Point::Polar { r: 0.0, phi: 0.0 }, 0.3, 5.0);
        assert_eq!(out.event, StepEvent::Boundary);
        assert_relative_eq!(out.traveled, 1.0, epsilon = 1e-12);
        assert_relative_eq!(out.back_dir, PI / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn cap_round_trip() {
        let c = Cap::new(1.2).unwrap();
        let p = Point::Polar { r: 0.4, phi: 1.0 };
        let q = Point::Polar { r: 0.9, phi: 2.5 };
        let d = c.distance(&p, &q);
        let dir = c.directions_to(&p, &q)[0];
        let out = c.step(&p, dir, d);
        assert!(c.distance(&out.end, &q) < 1e-12);
        let back = c.step(&out.end, out.back_dir, d);
        assert!(c.distance(&back.end, &p) < 1e-12);
    }

    #[test]
    fn doubled_hemisphere_is_the_round_sphere() {
        let dc = DoubledCap::new(FRAC_PI_2).unwrap();
        let n = Point::Sheet { sheet: 0, r: 0.0, phi: 0.0 };
        let s = Point::Sheet { sheet: 1, r: 0.0, phi: 0.0 };
        assert_relative_eq!(dc.distance(&n, &s), PI, epsilon = 1e-12);
        let p = Point::Sheet { sheet: 0, r: 0.5, phi: 0.2 };
        let q = Point::Sheet { sheet: 1, r: 0.7, phi: 1.9 };
        let d = dc.distance(&p, &q);
        let dir = dc.directions_to(&p, &q)[0];
        let out = dc.step(&p, dir, d);
        assert!(dc.distance(&out.end, &q) < 1e-10);
        let back = dc.step(&out.end, out.back_dir, d);
        assert!(dc.distance(&back.end, &p) < 1e-10);
    }

    #[test]
    fn doubled_small_cap_crosses_the_seam() {
        let dc = DoubledCap::new(0.8).unwrap();
        let p = Point::Sheet { sheet: 0, r: 0.5, phi: 0.2 };
        let q = Point::Sheet { sheet: 1, r: 0.6, phi: 0.9 };
        let d = dc.distance(&p, &q);
        let dir = dc.directions_to(&p, &q)[0];
        let out = dc.step(&p, dir, d);
        assert!(dc.distance(&out.end, &q) < 1e-6);
    }
}
