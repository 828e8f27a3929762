//! Concrete two-dimensional Alexandrov spaces.
//!
//! Each space exposes the same metric primitives: distances, the space of
//! directions Σ_p (a circle or an arc), directions of minimizing geodesics and
//! a straight-line `step`. Direction coordinates are space specific and only
//! meaningful together with the point they were computed at.

mod cap;
mod cone;
mod mesh;
mod polygon;

pub use cap::{Cap, DoubledCap};
pub use cone::{Cone, Spindle};
pub use mesh::{Mesh, MeshLocus, SheetFace};
pub use polygon::{Locus, Polygon};

use crate::ext::RemEuclid;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use num_traits::Float;
use rand::Rng;

use crate::error::{GeoError, Result};

/// A point in variant-specific coordinates.
///
/// Serialized untagged, most specific variant first.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum Point {
    /// Points of a doubled cap.
    Sheet { sheet: u8, r: f64, phi: f64 },
    /// Cone, spindle and cap points.
    Polar { r: f64, phi: f64 },
    /// Polygon points.
    Plane { x: f64, y: f64 },
    /// Mesh points as a face and barycentric weights.
    Mesh { face: usize, bary: [f64; 3] },
}

/// Σ_p: a circle (`closed`) or an arc of the given length.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sigma {
    pub len: f64,
    pub closed: bool,
}

impl Sigma {
    pub fn circle(len: f64) -> Self {
        Sigma { len, closed: true }
    }

    pub fn arc(len: f64) -> Self {
        Sigma { len, closed: false }
    }

    /// Reduces a coordinate into `[0, len)` (circles) or clamps it (arcs).
    pub fn normalize(&self, x: f64) -> f64 {
        if self.closed {
            let y = x.rem_euclid(self.len);
            if y >= self.len {
                0.0
            } else {
                y
            }
        } else {
            x.clamp(0.0, self.len)
        }
    }

    /// Angle metric on Σ, capped at π.
    pub fn dist(&self, a: f64, b: f64) -> f64 {
        let d = if self.closed {
            wrap_signed(b - a, self.len).abs()
        } else {
            (b - a).abs()
        };
        d.min(PI)
    }

    pub fn diameter(&self) -> f64 {
        if self.closed {
            (self.len / 2.0).min(PI)
        } else {
            self.len.min(PI)
        }
    }

    /// `n` evenly spaced coordinates covering Σ (arc endpoints included).
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        if self.closed {
            (0..n).map(|i| self.len * i as f64 / n as f64).collect()
        } else {
            (0..n).map(|i| self.len * i as f64 / (n - 1) as f64).collect()
        }
    }

    /// The coordinate reached by moving `by` from `x` (wrapping or clamping).
    pub fn shift(&self, x: f64, by: f64) -> f64 {
        self.normalize(x + by)
    }
}

/// A vector of the tangent cone T_p: a norm and a direction on Σ_p.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TangentVec {
    pub norm: f64,
    pub angle: f64,
    pub sigma: Sigma,
}

impl TangentVec {
    pub fn origin(sigma: Sigma) -> Self {
        TangentVec { norm: 0.0, angle: 0.0, sigma }
    }

    pub fn new(norm: f64, angle: f64, sigma: Sigma) -> Self {
        TangentVec { norm, angle: sigma.normalize(angle), sigma }
    }

    pub fn is_origin(&self) -> bool {
        self.norm == 0.0
    }

    /// ⟨u, v⟩ = |u||v| cos ∠(u, v) with the angle measured on Σ_p.
    pub fn dot(&self, other: &TangentVec) -> f64 {
        if self.norm == 0.0 || other.norm == 0.0 {
            return 0.0;
        }
        self.norm * other.norm * self.sigma.dist(self.angle, other.angle).cos()
    }

    pub fn scale(&self, s: f64) -> Self {
        TangentVec { norm: self.norm * s, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StepEvent {
    None,
    Vertex,
    Boundary,
}

/// Result of moving straight from a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub end: Point,
    pub traveled: f64,
    /// Σ-coordinate at `end` of the direction pointing back along the step.
    pub back_dir: f64,
    pub event: StepEvent,
}

/// Reduces `x` into `(-period/2, period/2]`.
pub fn wrap_signed(x: f64, period: f64) -> f64 {
    let mut y = x.rem_euclid(period);
    if y > period / 2.0 {
        y -= period;
    }
    y
}

/// Sorts coordinates on a circle and drops near duplicates.
pub fn dedupe_circle(mut v: Vec<f64>, period: f64) -> Vec<f64> {
    for x in v.iter_mut() {
        *x = x.rem_euclid(period);
        if *x >= period {
            *x = 0.0;
        }
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        if let Some(&last) = out.last() {
            if wrap_signed(x - last, period).abs() < 1e-9 {
                continue;
            }
        }
        out.push(x);
    }
    if out.len() > 1 && wrap_signed(out[0] - out[out.len() - 1], period).abs() < 1e-9 {
        out.pop();
    }
    out
}

/// Distance together with an explicit error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Certified {
    pub value: f64,
    pub error: f64,
}

/// A validated space.
#[derive(Debug, Clone)]
pub enum Space {
    Cone(Cone),
    Spindle(Spindle),
    Polygon(Polygon),
    Cap(Cap),
    Mesh(Mesh),
    DoubledCap(DoubledCap),
}

impl Space {
    pub fn cone(theta: f64) -> Result<Self> {
        Ok(Space::Cone(Cone::new(theta)?))
    }

    pub fn spindle(theta: f64) -> Result<Self> {
        Ok(Space::Spindle(Spindle::new(theta)?))
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        Ok(Space::Polygon(Polygon::new(vertices)?))
    }

    pub fn cap(r0: f64) -> Result<Self> {
        Ok(Space::Cap(Cap::new(r0)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Space::Cone(_) => "cone",
            Space::Spindle(_) => "spindle",
            Space::Polygon(_) => "polygon",
            Space::Cap(_) => "cap",
            Space::Mesh(_) => "mesh",
            Space::DoubledCap(_) => "doubled_cap",
        }
    }

    /// The lower curvature bound κ.
    pub fn kappa(&self) -> f64 {
        match self {
            Space::Spindle(_) | Space::Cap(_) | Space::DoubledCap(_) => 1.0,
            _ => 0.0,
        }
    }

    pub fn has_boundary(&self) -> bool {
        matches!(self, Space::Polygon(_) | Space::Cap(_))
    }

    /// Validates a point and returns its normalized form.
    pub fn check_point(&self, p: &Point) -> Result<Point> {
        match self {
            Space::Cone(s) => s.check_point(p),
            Space::Spindle(s) => s.check_point(p),
            Space::Polygon(s) => s.check_point(p),
            Space::Cap(s) => s.check_point(p),
            Space::Mesh(s) => s.check_point(p),
            Space::DoubledCap(s) => s.check_point(p),
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        match self {
            Space::Cone(s) => s.distance(p, q),
            Space::Spindle(s) => s.distance(p, q),
            Space::Polygon(s) => s.distance(p, q),
            Space::Cap(s) => s.distance(p, q),
            Space::Mesh(s) => s.distance(p, q),
            Space::DoubledCap(s) => s.distance(p, q),
        }
    }

    /// Distance with an error bound; exact spaces report zero error.
    pub fn distance_certified(&self, p: &Point, q: &Point) -> Certified {
        match self {
            Space::Mesh(s) => s.distance_certified(p, q),
            _ => Certified { value: self.distance(p, q), error: 0.0 },
        }
    }

    pub fn sigma(&self, p: &Point) -> Sigma {
        match self {
            Space::Cone(s) => s.sigma(p),
            Space::Spindle(s) => s.sigma(p),
            Space::Polygon(s) => s.sigma(p),
            Space::Cap(s) => s.sigma(p),
            Space::Mesh(s) => s.sigma(p),
            Space::DoubledCap(s) => s.sigma(p),
        }
    }

    /// Directions at `p` of the minimizing geodesics to `q` (empty if p = q).
    pub fn directions_to(&self, p: &Point, q: &Point) -> Vec<f64> {
        match self {
            Space::Cone(s) => s.directions_to(p, q),
            Space::Spindle(s) => s.directions_to(p, q),
            Space::Polygon(s) => s.directions_to(p, q),
            Space::Cap(s) => s.directions_to(p, q),
            Space::Mesh(s) => s.directions_to(p, q),
            Space::DoubledCap(s) => s.directions_to(p, q),
        }
    }

    /// log_p q = |pq|·↑_p^q.
    pub fn log_map(&self, p: &Point, q: &Point) -> TangentVec {
        let sigma = self.sigma(p);
        match self.directions_to(p, q).first() {
            Some(&a) => TangentVec::new(self.distance(p, q), a, sigma),
            None => TangentVec::origin(sigma),
        }
    }

    /// Moves straight from `p` in direction `dir` for at most `len`, stopping
    /// early at cone points and at the boundary.
    pub fn step(&self, p: &Point, dir: f64, len: f64) -> StepOutcome {
        match self {
            Space::Cone(s) => s.step(p, dir, len),
            Space::Spindle(s) => s.step(p, dir, len),
            Space::Polygon(s) => s.step(p, dir, len),
            Space::Cap(s) => s.step(p, dir, len),
            Space::Mesh(s) => s.step(p, dir, len),
            Space::DoubledCap(s) => s.step(p, dir, len),
        }
    }

    /// Motion along a curved boundary in a direction tangent to it, where a
    /// straight step would leave the space at once.
    pub fn slide(&self, p: &Point, dir: f64, len: f64) -> Option<StepOutcome> {
        match self {
            Space::Cap(c) => c.slide(p, dir, len),
            _ => None,
        }
    }

    /// The direction that continues a curve arriving with back direction
    /// `back`: the point of Σ_p at arc distance `len/2` from it. At regular
    /// points this is the straight continuation, at cone points the equal
    /// split. Arcs (boundary points) have no continuation.
    pub fn continuation(&self, p: &Point, back: f64) -> Option<f64> {
        let sigma = self.sigma(p);
        if sigma.closed {
            Some(sigma.shift(back, sigma.len / 2.0))
        } else {
            None
        }
    }

    /// Follows the straight/equal-split continuation for length `len`.
    /// Returns the visited points (start, every vertex hit, end) with their
    /// arclength and the final outcome.
    pub fn trace(&self, p: &Point, dir: f64, len: f64) -> (Vec<(f64, Point)>, StepOutcome) {
        let mut pts = alloc::vec![(0.0, *p)];
        let mut cur = *p;
        let mut d = dir;
        let mut s = 0.0;
        let mut last = StepOutcome { end: *p, traveled: 0.0, back_dir: dir, event: StepEvent::None };
        let mut guard = 0;
        while len - s > 1e-15 && guard < 100_000 {
            guard += 1;
            let out = self.step(&cur, d, len - s);
            s += out.traveled;
            cur = out.end;
            last = out;
            pts.push((s, cur));
            match out.event {
                StepEvent::None => break,
                StepEvent::Boundary => break,
                StepEvent::Vertex => match self.continuation(&cur, out.back_dir) {
                    Some(nd) => d = nd,
                    None => break,
                },
            }
        }
        (pts, last)
    }

    /// Points sampled along the minimizing geodesic from `p` to `q`.
    pub fn geodesic(&self, p: &Point, q: &Point, n: usize) -> Vec<(f64, Point)> {
        let d = self.distance(p, q);
        let dirs = self.directions_to(p, q);
        let Some(&dir) = dirs.first() else {
            return alloc::vec![(0.0, *p)];
        };
        self.sample_ray(p, dir, d, n)
    }

    /// `n + 1` equally spaced points along the traced ray of length `len`.
    pub fn sample_ray(&self, p: &Point, dir: f64, len: f64, n: usize) -> Vec<(f64, Point)> {
        let n = n.max(1);
        let h = len / n as f64;
        let mut out = alloc::vec![(0.0, *p)];
        let mut cur = *p;
        let mut d = dir;
        for i in 1..=n {
            let (_, o) = self.trace(&cur, d, h);
            cur = o.end;
            out.push((i as f64 * h, cur));
            if o.event == StepEvent::Boundary && o.traveled < h - 1e-12 {
                break;
            }
            match self.continuation(&cur, o.back_dir) {
                Some(nd) => d = nd,
                None => break,
            }
        }
        out
    }

    /// Cone points (angle < 2π) and polygon corners with their total angle.
    pub fn cone_points(&self) -> Vec<(Point, f64)> {
        match self {
            Space::Cone(c) if c.theta < TAU - 1e-12 => {
                alloc::vec![(Point::Polar { r: 0.0, phi: 0.0 }, c.theta)]
            }
            Space::Spindle(s) if s.theta < TAU - 1e-12 => alloc::vec![
                (Point::Polar { r: 0.0, phi: 0.0 }, s.theta),
                (Point::Polar { r: PI, phi: 0.0 }, s.theta),
            ],
            Space::Polygon(g) => (0..g.len())
                .map(|i| {
                    let v = g.vertices[i];
                    (Point::Plane { x: v[0], y: v[1] }, g.interior_angle(i))
                })
                .collect(),
            Space::Mesh(m) => m.cone_points(),
            _ => Vec::new(),
        }
    }

    /// Distance to the boundary and the directions of its inward normals.
    pub fn boundary_feet(&self, p: &Point) -> Option<(f64, Vec<f64>)> {
        match self {
            Space::Polygon(g) => Some(g.boundary_feet(p)),
            Space::Cap(c) => Some(c.boundary_feet(p)),
            _ => None,
        }
    }

    /// A random point, spread over a region of unit scale around the base.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            Space::Cone(c) => Point::Polar { r: rng.gen_range(0.05..2.0), phi: rng.gen_range(0.0..c.theta) },
            Space::Spindle(s) => Point::Polar { r: rng.gen_range(0.05..PI - 0.05), phi: rng.gen_range(0.0..s.theta) },
            Space::Polygon(g) => {
                let (lo, hi) = g.bounding_box();
                loop {
                    let x = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
                    if g.contains(x, 0.0) {
                        return Point::Plane { x: x[0], y: x[1] };
                    }
                }
            }
            Space::Cap(c) => Point::Polar { r: c.r0 * rng.gen::<f64>().sqrt(), phi: rng.gen_range(0.0..TAU) },
            Space::Mesh(m) => m.sample_point(rng),
            Space::DoubledCap(c) => Point::Sheet {
                sheet: rng.gen_range(0..2u8),
                r: c.r0 * rng.gen::<f64>().sqrt(),
                phi: rng.gen_range(0.0..TAU),
            },
        }
    }

    /// Glues two copies along the boundary.
    pub fn build_doubling(&self) -> Result<Space> {
        match self {
            Space::Polygon(g) => Ok(Space::Mesh(Mesh::double_polygon(g)?)),
            Space::Cap(c) => Ok(Space::DoubledCap(DoubledCap::new(c.r0)?)),
            _ => Err(GeoError::Unsupported("only spaces with boundary can be doubled".into())),
        }
    }

    /// The canonical projection of a doubled space onto its base.
    pub fn project(&self, p: &Point) -> Result<Point> {
        match (self, *p) {
            (Space::Mesh(m), _) => m.project(p),
            (Space::DoubledCap(_), Point::Sheet { r, phi, .. }) => Ok(Point::Polar { r, phi }),
            _ => Err(GeoError::Unsupported("not a doubled space".into())),
        }
    }

    /// Every point of a doubled space lying over `base`.
    pub fn lift(&self, base: &Point) -> Result<Vec<Point>> {
        match (self, *base) {
            (Space::Mesh(m), _) => m.lift(base),
            (Space::DoubledCap(_), Point::Polar { r, phi }) => Ok(alloc::vec![
                Point::Sheet { sheet: 0, r, phi },
                Point::Sheet { sheet: 1, r, phi },
            ]),
            _ => Err(GeoError::Unsupported("not a doubled space".into())),
        }
    }

    /// Cone angle (or total interior angle) at a point.
    pub fn cone_angle(&self, p: &Point) -> f64 {
        self.sigma(p).len
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sigma_metric() {
        let s = Sigma::circle(1.5 * PI);
        assert_relative_eq!(s.dist(0.0, 0.75 * PI), 0.75 * PI, epsilon = 1e-15);
        assert_relative_eq!(s.dist(0.1, 1.4 * PI), 0.1 + 0.1 * PI, epsilon = 1e-12);
        let big = Sigma::circle(TAU);
        assert_relative_eq!(big.dist(0.0, PI), PI, epsilon = 1e-15);
        assert_eq!(Sigma::arc(1.0).normalize(3.0), 1.0);
    }

    #[test]
    fn scalar_product_wraps() {
        let s = Sigma::circle(1.5 * PI);
        let u = TangentVec::new(1.0, 0.0, s);
        let v = TangentVec::new(1.0, 0.75 * PI, s);
        assert_relative_eq!(u.dot(&v), -(0.5f64.sqrt()), epsilon = 1e-15);
        assert_relative_eq!(u.dot(&u), 1.0, epsilon = 1e-15);
        assert_eq!(TangentVec::origin(s).dot(&v), 0.0);
    }

    #[test]
    fn dedupe_merges_wrapped_copies() {
        let v = dedupe_circle(alloc::vec![0.0, TAU - 1e-12, 1.0, 1.0 + 1e-13], TAU);
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn equal_split_continuation_on_cone() {
        let c = Space::cone(1.5 * PI).unwrap();
        let p = Point::Polar { r: 1.0, phi: 0.3 };
        let (pts, out) = c.trace(&p, PI, 2.0);
        assert_eq!(pts.len(), 3);
        match out.end {
            Point::Polar { r, phi } => {
                assert_relative_eq!(r, 1.0, epsilon = 1e-12);
                assert_relative_eq!(phi, (0.3 + 0.75 * PI) % (1.5 * PI), epsilon = 1e-12);
            }
            _ => panic!(),
        }
    }
}
