//! Euclidean cones and spherical spindles over a circle of length θ.
//!
//! Points are `(r, φ)` with φ taken mod θ. At a regular point directions are
//! measured counter-clockwise from the outward radial direction; at an apex the
//! direction is the angular coordinate of the ray.

use crate::ext::RemEuclid;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use num_traits::Float;

use super::{dedupe_circle, wrap_signed, Point, Sigma, StepEvent, StepOutcome};
use crate::error::{GeoError, Result};

pub(crate) const APEX_SNAP: f64 = 1e-12;

/// The Euclidean cone over a circle of length `theta ∈ (0, 2π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    pub theta: f64,
}

/// The spherical suspension of a circle of length `theta ∈ (0, 2π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spindle {
    pub theta: f64,
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= TAU * (1.0 + 1e-12)) {
        return Err(GeoError::Curvature(alloc::format!(
            "total angle {theta} must lie in (0, 2π]"
        )));
    }
    Ok(())
}

fn polar(p: &Point) -> Result<(f64, f64)> {
    match *p {
        Point::Polar { r, phi } => Ok((r, phi)),
        _ => Err(GeoError::InvalidPoint("expected polar coordinates (r, phi)".into())),
    }
}

impl Cone {
    pub fn new(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Cone { theta: theta.min(TAU) })
    }

    pub fn check_point(&self, p: &Point) -> Result<Point> {
        let (r, phi) = polar(p)?;
        if !(r >= 0.0 && r.is_finite() && phi.is_finite()) {
            return Err(GeoError::InvalidPoint("cone point needs r ≥ 0 and finite phi".into()));
        }
        Ok(Point::Polar { r, phi: phi.rem_euclid(self.theta) })
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let (r1, f1) = polar(p).unwrap_or((0.0, 0.0));
        let (r2, f2) = polar(q).unwrap_or((0.0, 0.0));
        let a = wrap_signed(f2 - f1, self.theta).abs();
        if a >= PI {
            r1 + r2
        } else {
            let d = r1 - r2;
            let s = (a / 2.0).sin();
            (d * d + 4.0 * r1 * r2 * s * s).sqrt()
        }
    }

    pub fn sigma(&self, p: &Point) -> Sigma {
        let (r, _) = polar(p).unwrap_or((0.0, 0.0));
        if r <= APEX_SNAP {
            Sigma::circle(self.theta)
        } else {
            Sigma::circle(TAU)
        }
    }

    pub fn directions_to(&self, p: &Point, q: &Point) -> Vec<f64> {
        let (rp, fp) = polar(p).unwrap_or((0.0, 0.0));
        let (rq, fq) = polar(q).unwrap_or((0.0, 0.0));
        if self.distance(p, q) == 0.0 {
            return Vec::new();
        }
        if rp <= APEX_SNAP {
            return vec![fq.rem_euclid(self.theta)];
        }
        if rq <= APEX_SNAP {
            return vec![PI];
        }
        let d = wrap_signed(fq - fp, self.theta);
        let mut deltas = vec![d];
        if (d.abs() - self.theta / 2.0).abs() < 1e-12 {
            deltas.push(if d > 0.0 { d - self.theta } else { d + self.theta });
        }
        let dirs = deltas
            .into_iter()
            .map(|d| {
                if d.abs() >= PI {
                    PI
                } else {
                    (rq * d.sin()).atan2(rq * d.cos() - rp).rem_euclid(TAU)
                }
            })
            .collect();
        dedupe_circle(dirs, TAU)
    }

    pub fn step(&self, p: &Point, dir: f64, len: f64) -> StepOutcome {
        let (r, phi) = polar(p).unwrap_or((0.0, 0.0));
        if r <= APEX_SNAP {
            let f = dir.rem_euclid(self.theta);
            return StepOutcome {
                end: Point::Polar { r: len, phi: f },
                traveled: len,
                back_dir: PI,
                event: StepEvent::None,
            };
        }
        let (sb, cb) = dir.sin_cos();
        if cb < 0.0 && (r * sb).abs() < APEX_SNAP {
            let to_apex = -r * cb;
            if len >= to_apex - APEX_SNAP {
                return StepOutcome {
                    end: Point::Polar { r: 0.0, phi },
                    traveled: to_apex,
                    back_dir: phi,
                    event: StepEvent::Vertex,
                };
            }
        }
        let x = r + len * cb;
        let y = len * sb;
        let rr = x.hypot(y);
        let delta = y.atan2(x);
        if rr <= APEX_SNAP {
            return StepOutcome {
                end: Point::Polar { r: 0.0, phi },
                traveled: len,
                back_dir: phi,
                event: StepEvent::Vertex,
            };
        }
        StepOutcome {
            end: Point::Polar { r: rr, phi: (phi + delta).rem_euclid(self.theta) },
            traveled: len,
            back_dir: (dir + PI - delta).rem_euclid(TAU),
            event: StepEvent::None,
        }
    }
}

impl Spindle {
    pub fn new(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Spindle { theta: theta.min(TAU) })
    }

    pub fn check_point(&self, p: &Point) -> Result<Point> {
        let (r, phi) = polar(p)?;
        if !(r >= 0.0 && r <= PI && phi.is_finite()) {
            return Err(GeoError::InvalidPoint("spindle point needs 0 ≤ r ≤ π".into()));
        }
        Ok(Point::Polar { r, phi: phi.rem_euclid(self.theta) })
    }

    fn is_pole(r: f64) -> bool {
        r <= APEX_SNAP || r >= PI - APEX_SNAP
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let (r1, f1) = polar(p).unwrap_or((0.0, 0.0));
        let (r2, f2) = polar(q).unwrap_or((0.0, 0.0));
        let a = wrap_signed(f2 - f1, self.theta).abs().min(PI);
        let hd = ((r1 - r2) / 2.0).sin();
        let ha = (a / 2.0).sin();
        let x = (hd * hd + r1.sin() * r2.sin() * ha * ha).clamp(0.0, 1.0);
        2.0 * x.sqrt().atan2((1.0 - x).sqrt())
    }

    pub fn sigma(&self, p: &Point) -> Sigma {
        let (r, _) = polar(p).unwrap_or((0.0, 0.0));
        if Self::is_pole(r) {
            Sigma::circle(self.theta)
        } else {
            Sigma::circle(TAU)
        }
    }

    pub fn directions_to(&self, p: &Point, q: &Point) -> Vec<f64> {
        let (rp, fp) = polar(p).unwrap_or((0.0, 0.0));
        let (rq, fq) = polar(q).unwrap_or((0.0, 0.0));
        let dist = self.distance(p, q);
        if dist == 0.0 {
            return Vec::new();
        }
        if Self::is_pole(rp) {
            if Self::is_pole(rq) {
                let n = 360;
                return (0..n).map(|i| self.theta * i as f64 / n as f64).collect();
            }
            return vec![fq.rem_euclid(self.theta)];
        }
        if rq <= APEX_SNAP {
            return vec![PI];
        }
        if rq >= PI - APEX_SNAP {
            return vec![0.0];
        }
        if dist >= PI - 1e-12 {
            let n = 360;
            return (0..n).map(|i| TAU * i as f64 / n as f64).collect();
        }
        let d = wrap_signed(fq - fp, self.theta);
        let mut deltas = vec![d];
        if (d.abs() - self.theta / 2.0).abs() < 1e-12 {
            deltas.push(if d > 0.0 { d - self.theta } else { d + self.theta });
        }
        let (sp, cp) = rp.sin_cos();
        let dirs = deltas
            .into_iter()
            .map(|d| {
                let q = [rq.sin() * d.cos(), rq.sin() * d.sin(), rq.cos()];
                let pp = [sp, 0.0, cp];
                let dot = pp[0] * q[0] + pp[2] * q[2];
                let w = [q[0] - dot * pp[0], q[1], q[2] - dot * pp[2]];
                let er = w[0] * cp - w[2] * sp;
                w[1].atan2(er).rem_euclid(TAU)
            })
            .collect();
        dedupe_circle(dirs, TAU)
    }

    pub fn step(&self, p: &Point, dir: f64, len: f64) -> StepOutcome {
        let (mut r, mut phi) = polar(p).unwrap_or((0.0, 0.0));
        let mut dir = dir;
        let mut left = len;
        let mut traveled = 0.0;
        if Self::is_pole(r) {
            let north = r <= APEX_SNAP;
            let f = dir.rem_euclid(self.theta);
            if len >= PI - APEX_SNAP {
                return StepOutcome {
                    end: Point::Polar { r: if north { PI } else { 0.0 }, phi: f },
                    traveled: PI,
                    back_dir: f,
                    event: StepEvent::Vertex,
                };
            }
            return StepOutcome {
                end: Point::Polar { r: if north { len } else { PI - len }, phi: f },
                traveled: len,
                back_dir: if north { PI } else { 0.0 },
                event: StepEvent::None,
            };
        }
        let mut back = (dir + PI).rem_euclid(TAU);
        while left > 0.0 {
            let s = left.min(1.5);
            let (sb, cb) = dir.sin_cos();
            if sb.abs() < APEX_SNAP {
                let (to_pole, pole_r) = if cb < 0.0 { (r, 0.0) } else { (PI - r, PI) };
                if s >= to_pole - APEX_SNAP {
                    return StepOutcome {
                        end: Point::Polar { r: pole_r, phi },
                        traveled: traveled + to_pole,
                        back_dir: phi,
                        event: StepEvent::Vertex,
                    };
                }
            }
            let (sr, cr) = r.sin_cos();
            let pp = [sr, 0.0, cr];
            let u = [cb * cr, sb, -cb * sr];
            let (ss, cs) = s.sin_cos();
            let x = [cs * pp[0] + ss * u[0], cs * pp[1] + ss * u[1], cs * pp[2] + ss * u[2]];
            let rho = x[0].hypot(x[1]);
            let nr = rho.atan2(x[2]);
            if nr <= APEX_SNAP || nr >= PI - APEX_SNAP {
                return StepOutcome {
                    end: Point::Polar { r: if nr <= APEX_SNAP { 0.0 } else { PI }, phi },
                    traveled: traveled + s,
                    back_dir: phi,
                    event: StepEvent::Vertex,
                };
            }
            let delta = x[1].atan2(x[0]);
            let t = [ss * pp[0] - cs * u[0], ss * pp[1] - cs * u[1], ss * pp[2] - cs * u[2]];
            let (sd, cd) = delta.sin_cos();
            let (snr, cnr) = nr.sin_cos();
            let er = t[0] * cnr * cd + t[1] * cnr * sd - t[2] * snr;
            let ef = -t[0] * sd + t[1] * cd;
            back = ef.atan2(er).rem_euclid(TAU);
            dir = (back + PI).rem_euclid(TAU);
            r = nr;
            phi = (phi + delta).rem_euclid(self.theta);
            left -= s;
            traveled += s;
        }
        StepOutcome {
            end: Point::Polar { r, phi },
            traveled,
            back_dir: back,
            event: StepEvent::None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(r: f64, phi: f64) -> Point {
        Point::Polar { r, phi }
    }

    #[test]
    fn cone_distances() {
        let plane = Cone::new(TAU).unwrap();
        assert_relative_eq!(plane.distance(&pt(1.0, 0.0), &pt(1.0, PI)), 2.0, epsilon = 1e-15);
        let half = Cone::new(PI).unwrap();
        assert_relative_eq!(half.distance(&pt(1.0, 0.0), &pt(1.0, PI / 2.0)), 2f64.sqrt(), epsilon = 1e-15);
        let c = Cone::new(1.5 * PI).unwrap();
        assert_relative_eq!(
            c.distance(&pt(1.0, 0.0), &pt(1.0, 1.25 * PI)),
            2.0 * (PI / 8.0).sin(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn two_minimizers_across_the_apex() {
        let c = Cone::new(TAU - 0.1).unwrap();
        let theta = c.theta;
        let dirs = c.directions_to(&pt(1.0, 0.0), &pt(1.0, theta / 2.0));
        assert_eq!(dirs.len(), 2);
    }

    #[test]
    fn cone_step_matches_distance() {
        let c = Cone::new(1.5 * PI).unwrap();
        let p = pt(1.0, 0.3);
        for k in 0..12 {
            let dir = k as f64 * 0.5 + 0.01;
            let out = c.step(&p, dir, 0.7);
            assert!(c.distance(&p, &out.end) <= 0.7 + 1e-12);
            let back = c.step(&out.end, out.back_dir, 0.7);
            assert!(c.distance(&back.end, &p) < 1e-12);
        }
    }

    #[test]
    fn cone_step_into_apex() {
        let c = Cone::new(1.5 * PI).unwrap();
        let out = c.step(&pt(1.0, 0.2), PI, 3.0);
        assert_eq!(out.event, StepEvent::Vertex);
        assert_relative_eq!(out.traveled, 1.0, epsilon = 1e-15);
        assert_relative_eq!(out.back_dir, 0.2, epsilon = 1e-15);
    }

    #[test]
    fn spindle_distances_and_steps() {
        let s = Spindle::new(1.5 * PI).unwrap();
        let p = pt(1.0, 0.0);
        let q = pt(1.2, 2.0);
        let d = s.distance(&p, &q);
        let dirs = s.directions_to(&p, &q);
        assert_eq!(dirs.len(), 1);
        let out = s.step(&p, dirs[0], d);
        assert!(s.distance(&out.end, &q) < 1e-10);
        let back = s.step(&out.end, out.back_dir, d);
        assert!(s.distance(&back.end, &p) < 1e-10);
        assert_relative_eq!(s.distance(&pt(0.0, 0.0), &pt(PI, 1.0)), PI, epsilon = 1e-15);
    }

    #[test]
    fn spindle_meridian_hits_pole() {
        let s = Spindle::new(PI).unwrap();
        let out = s.step(&pt(0.5, 0.4), PI, 2.0);
        assert_eq!(out.event, StepEvent::Vertex);
        assert_relative_eq!(out.traveled, 0.5, epsilon = 1e-15);
    }
}
