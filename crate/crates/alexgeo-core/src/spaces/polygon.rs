//! Strictly convex planar polygons with boundary.

use crate::ext::RemEuclid;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use num_traits::Float;

use super::{Point, Sigma, StepEvent, StepOutcome};
use crate::error::{GeoError, Result};

/// Where a point sits relative to the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locus {
    Interior,
    Edge(usize),
    Corner(usize),
}

/// A strictly convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
    normals: Vec<[f64; 2]>,
    scale: f64,
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

impl Polygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeoError::InvalidSpace("a polygon needs at least three vertices".into()));
        }
        let mut normals = Vec::with_capacity(n);
        let mut scale: f64 = 0.0;
        for i in 0..n {
            let e = sub(vertices[(i + 1) % n], vertices[i]);
            let l = e[0].hypot(e[1]);
            if !(l > 0.0) {
                return Err(GeoError::InvalidSpace(alloc::format!("degenerate edge {i}")));
            }
            scale = scale.max(l);
            normals.push([-e[1] / l, e[0] / l]);
        }
        for i in 0..n {
            let e0 = sub(vertices[(i + 1) % n], vertices[i]);
            let e1 = sub(vertices[(i + 2) % n], vertices[(i + 1) % n]);
            if cross(e0, e1) <= 1e-12 * scale * scale {
                return Err(GeoError::InvalidSpace(alloc::format!(
                    "vertex {} breaks strict convexity or counter-clockwise order",
                    (i + 1) % n
                )));
            }
        }
        Ok(Polygon { vertices, normals, scale })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn tol(&self) -> f64 {
        1e-12 * self.scale.max(1.0)
    }

    /// Inward unit normal of edge `i` (from vertex i to i+1).
    pub fn inward_normal(&self, i: usize) -> [f64; 2] {
        self.normals[i]
    }

    /// Signed distance from `x` to the line of edge `i` (positive inside).
    pub fn edge_height(&self, i: usize, x: [f64; 2]) -> f64 {
        dot(self.normals[i], sub(x, self.vertices[i]))
    }

    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.len();
        let a = sub(self.vertices[(i + 1) % n], self.vertices[i]);
        let b = sub(self.vertices[(i + n - 1) % n], self.vertices[i]);
        cross(a, b).atan2(dot(a, b)).rem_euclid(TAU)
    }

    pub fn contains(&self, x: [f64; 2], tol: f64) -> bool {
        (0..self.len()).all(|i| self.edge_height(i, x) >= -tol)
    }

    pub fn locus(&self, x: [f64; 2]) -> Locus {
        let tol = self.tol() * 10.0;
        let n = self.len();
        let on: Vec<usize> = (0..n).filter(|&i| self.edge_height(i, x).abs() <= tol).collect();
        match on.len() {
            0 => Locus::Interior,
            1 => Locus::Edge(on[0]),
            _ => {
                let (a, b) = (on[0], on[1]);
                if (a + 1) % n == b {
                    Locus::Corner(b)
                } else {
                    Locus::Corner(a)
                }
            }
        }
    }

    fn coords(p: &Point) -> [f64; 2] {
        match *p {
            Point::Plane { x, y } => [x, y],
            _ => [f64::NAN, f64::NAN],
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<Point> {
        match *p {
            Point::Plane { x, y } if x.is_finite() && y.is_finite() => {
                if !self.contains([x, y], 1e-9 * self.scale.max(1.0)) {
                    return Err(GeoError::InvalidPoint(alloc::format!("({x}, {y}) lies outside the polygon")));
                }
                Ok(*p)
            }
            _ => Err(GeoError::InvalidPoint("expected planar coordinates (x, y)".into())),
        }
    }

    /// Σ_x together with the absolute angle of its coordinate origin.
    pub fn frame(&self, x: [f64; 2]) -> (Sigma, f64) {
        let n = self.len();
        match self.locus(x) {
            Locus::Interior => (Sigma::circle(TAU), 0.0),
            Locus::Edge(i) => {
                let e = sub(self.vertices[(i + 1) % n], self.vertices[i]);
                (Sigma::arc(PI), e[1].atan2(e[0]))
            }
            Locus::Corner(i) => {
                let e = sub(self.vertices[(i + 1) % n], self.vertices[i]);
                (Sigma::arc(self.interior_angle(i)), e[1].atan2(e[0]))
            }
        }
    }

    fn to_sigma(sig: &Sigma, offset: f64, abs: f64) -> f64 {
        if sig.closed {
            abs.rem_euclid(TAU)
        } else {
            let rel = (abs - offset + PI - sig.len / 2.0).rem_euclid(TAU) - PI + sig.len / 2.0;
            rel.clamp(0.0, sig.len)
        }
    }

    /// Absolute planar angle of the direction with Σ-coordinate `s` at `p`.
    pub fn absolute_angle(&self, p: &Point, s: f64) -> f64 {
        let (_, offset) = self.frame(Self::coords(p));
        offset + s
    }

    /// Σ-coordinate at `p` of the absolute planar angle `abs`.
    pub fn sigma_coordinate(&self, p: &Point, abs: f64) -> f64 {
        let (sig, offset) = self.frame(Self::coords(p));
        Self::to_sigma(&sig, offset, abs)
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let d = sub(Self::coords(q), Self::coords(p));
        d[0].hypot(d[1])
    }

    pub fn sigma(&self, p: &Point) -> Sigma {
        self.frame(Self::coords(p)).0
    }

    pub fn directions_to(&self, p: &Point, q: &Point) -> Vec<f64> {
        let d = sub(Self::coords(q), Self::coords(p));
        if d[0] == 0.0 && d[1] == 0.0 {
            return Vec::new();
        }
        alloc::vec![self.sigma_coordinate(p, d[1].atan2(d[0]))]
    }

    pub fn step(&self, p: &Point, dir: f64, len: f64) -> StepOutcome {
        let x = Self::coords(p);
        let abs = self.absolute_angle(p, dir);
        let u = [abs.cos(), abs.sin()];
        let tol = self.tol();
        let mut t_exit = f64::INFINITY;
        for i in 0..self.len() {
            let nu = dot(self.normals[i], u);
            let h = self.edge_height(i, x);
            if nu < -1e-14 {
                t_exit = t_exit.min((h.max(0.0)) / -nu);
            } else if nu.abs() <= 1e-14 && h < -tol {
                t_exit = 0.0;
            }
        }
        let (t, event) = if len <= t_exit {
            (len, StepEvent::None)
        } else {
            (t_exit, StepEvent::Boundary)
        };
        let mut end = [x[0] + t * u[0], x[1] + t * u[1]];
        let mut event = event;
        if event == StepEvent::Boundary {
            if let Locus::Corner(i) = self.locus(end) {
                end = self.vertices[i];
                event = StepEvent::Vertex;
            }
        }
        let end_p = Point::Plane { x: end[0], y: end[1] };
        let back = self.sigma_coordinate(&end_p, abs + PI);
        StepOutcome { end: end_p, traveled: t, back_dir: back, event }
    }

    /// Distance to the boundary and the inward normals of the nearest edges.
    pub fn boundary_feet(&self, p: &Point) -> (f64, Vec<f64>) {
        let x = Self::coords(p);
        let hs: Vec<f64> = (0..self.len()).map(|i| self.edge_height(i, x)).collect();
        let m = hs.iter().cloned().fold(f64::INFINITY, f64::min);
        let tol = self.tol() * 10.0;
        let dirs = (0..self.len())
            .filter(|&i| hs[i] <= m + tol)
            .map(|i| self.sigma_coordinate(p, self.normals[i][1].atan2(self.normals[i][0])))
            .collect();
        (m.max(0.0), dirs)
    }

    pub fn area(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| cross(self.vertices[i], self.vertices[(i + 1) % n]))
            .sum::<f64>()
            / 2.0
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square() -> Polygon {
        Polygon::new(alloc::vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn edge_tangents_at_rounded_edge_points() {
        let g = square();
        let p = Point::Plane { x: 1.2e-17, y: 0.7 };
        assert_eq!(g.directions_to(&p, &Point::Plane { x: 0.0, y: 0.1 }), alloc::vec![0.0]);
        assert_relative_eq!(g.directions_to(&p, &Point::Plane { x: 0.0, y: 0.9 })[0], PI);
    }

    #[test]
    fn rejects_clockwise_and_nonconvex() {
        assert!(Polygon::new(alloc::vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).is_err());
        assert!(Polygon::new(alloc::vec![[0.0, 0.0], [1.0, 0.0], [0.5, 0.5], [1.0, 1.0], [0.0, 1.0]]).is_err());
    }

    #[test]
    fn sigma_shapes() {
        let s = square();
        assert_eq!(s.sigma(&Point::Plane { x: 0.5, y: 0.5 }), Sigma::circle(TAU));
        assert_eq!(s.sigma(&Point::Plane { x: 0.5, y: 0.0 }), Sigma::arc(PI));
        let c = s.sigma(&Point::Plane { x: 1.0, y: 1.0 });
        assert!(!c.closed);
        assert_relative_eq!(c.len, PI / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn step_stops_at_boundary_and_corners() {
        let s = square();
        let p = Point::Plane { x: 0.5, y: 0.5 };
        let out = s.step(&p, 0.0, 2.0);
        assert_eq!(out.event, StepEvent::Boundary);
        assert_relative_eq!(out.traveled, 0.5, epsilon = 1e-15);
        let along = s.step(&Point::Plane { x: 0.5, y: 0.0 }, 0.0, 2.0);
        assert_eq!(along.event, StepEvent::Vertex);
        assert_eq!(along.end, Point::Plane { x: 1.0, y: 0.0 });
        let diag = s.step(&p, PI / 4.0, 5.0);
        assert_eq!(diag.event, StepEvent::Vertex);
    }

    #[test]
    fn boundary_distance() {
        let s = square();
        let (d, feet) = s.boundary_feet(&Point::Plane { x: 0.2, y: 0.5 });
        assert_relative_eq!(d, 0.2, epsilon = 1e-15);
        assert_eq!(feet.len(), 1);
        assert_relative_eq!(feet[0], 0.0, epsilon = 1e-15);
    }
}
