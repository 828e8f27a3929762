//! Closed triangulated surfaces with intrinsic edge lengths.
//!
//! Every face gets a planar layout with vertex 0 at the origin and vertex 1 on
//! the positive x-axis; edge `k` runs from local vertex `k` to `k + 1`.
//! Directions at face and edge points are angles in the face layout; at a
//! vertex they are arc positions on the star, starting from a fixed corner.
//!
//! Distances come from best-first unfolding of angular windows with a depth
//! cap, certified by Dijkstra on a subdivided edge graph.

use crate::ext::RemEuclid;
use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{PI, TAU};
use num_traits::Float;
use rand::Rng;

use super::{dedupe_circle, Certified, Point, Sigma, StepEvent, StepOutcome};
use crate::error::{GeoError, Result};
use crate::model_plane::comparison_angle;

type P2 = [f64; 2];

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: P2) -> f64 {
    a[0].hypot(a[1])
}

fn seg_dist(x: P2, a: P2, b: P2) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    let t = if l2 > 0.0 { (dot(sub(x, a), ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    norm(sub(x, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// Orientation-preserving isometry of the plane.
#[derive(Debug, Clone, Copy)]
struct Rigid {
    rot: f64,
    c: f64,
    s: f64,
    t: P2,
}

impl Rigid {
    fn apply(&self, x: P2) -> P2 {
        [self.c * x[0] - self.s * x[1] + self.t[0], self.s * x[0] + self.c * x[1] + self.t[1]]
    }
}

/// Where a face of a doubled polygon sits in the base polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetFace {
    pub sheet: u8,
    pub corners: [P2; 3],
}

/// Classification of a mesh point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshLocus {
    Vertex(usize),
    /// Face and local edge index.
    Edge(usize, usize),
    Face(usize),
}

#[derive(Debug, Clone)]
pub struct Mesh {
    tris: Vec<[usize; 3]>,
    lens: Vec<[f64; 3]>,
    layout: Vec<[P2; 3]>,
    adj: Vec<[(usize, usize); 3]>,
    corner: Vec<[f64; 3]>,
    stars: Vec<Vec<(usize, usize)>>,
    offsets: Vec<Vec<f64>>,
    star_index: Vec<[usize; 3]>,
    angles: Vec<f64>,
    sheets: Option<Vec<SheetFace>>,
    graph: Graph,
    scale: f64,
    depth: usize,
}

const SNAP: f64 = 1e-9;
const SUBDIV: usize = 8;
const WINDOW_BUDGET: usize = 400_000;

#[derive(Debug, Clone)]
struct Graph {
    n_nodes: usize,
    face_nodes: Vec<Vec<(usize, P2)>>,
    node_faces: Vec<Vec<usize>>,
}

struct Window {
    face: usize,
    src: P2,
    a: P2,
    b: P2,
    rot: f64,
    start: usize,
    depth: usize,
    lb: f64,
}

impl PartialEq for Window {
    fn eq(&self, o: &Self) -> bool {
        self.lb == o.lb
    }
}
impl Eq for Window {}
impl PartialOrd for Window {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Window {
    fn cmp(&self, o: &Self) -> Ordering {
        o.lb.total_cmp(&self.lb)
    }
}

struct Start {
    face: usize,
    pos: P2,
    /// Corner of the star when the source is a vertex.
    corner: Option<usize>,
    /// Rotation from the source face frame into this face.
    rot: f64,
}

struct Unfolding {
    best: f64,
    dirs: Vec<(f64, f64)>,
    cut_lb: Option<f64>,
}

impl Mesh {
    /// Builds a mesh from vertex coordinates in R³.
    pub fn from_coords(coords: &[[f64; 3]], tris: &[[usize; 3]]) -> Result<Self> {
        let mut lens = Vec::with_capacity(tris.len());
        for (i, t) in tris.iter().enumerate() {
            let mut l = [0.0; 3];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if a >= coords.len() || b >= coords.len() {
                    return Err(GeoError::InvalidSpace(alloc::format!("triangle {i} references a missing vertex")));
                }
                let d = [coords[a][0] - coords[b][0], coords[a][1] - coords[b][1], coords[a][2] - coords[b][2]];
                l[k] = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            }
            lens.push(l);
        }
        Self::from_edge_lengths(tris, &lens)
    }

    /// Builds a mesh from per-triangle edge lengths `[|v0v1|, |v1v2|, |v2v0|]`.
    pub fn from_edge_lengths(tris: &[[usize; 3]], lens: &[[f64; 3]]) -> Result<Self> {
        if tris.len() != lens.len() {
            return Err(GeoError::InvalidSpace("edge_lengths must be parallel to triangles".into()));
        }
        let adj = Self::adjacency_from_indices(tris)?;
        Self::from_parts(tris.to_vec(), lens.to_vec(), adj, None)
    }

    fn adjacency_from_indices(tris: &[[usize; 3]]) -> Result<Vec<[(usize, usize); 3]>> {
        let mut edges: Vec<((usize, usize), usize, usize)> = Vec::with_capacity(tris.len() * 3);
        for (f, t) in tris.iter().enumerate() {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(GeoError::InvalidSpace(alloc::format!("triangle {f} repeats a vertex")));
            }
            for k in 0..3 {
                edges.push(((t[k], t[(k + 1) % 3]), f, k));
            }
        }
        edges.sort_by(|a, b| a.0.cmp(&b.0));
        for w in edges.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(GeoError::InvalidSpace(alloc::format!(
                    "edge {:?} appears twice with the same orientation (faces {} and {})",
                    w[0].0,
                    w[0].1,
                    w[1].1
                )));
            }
        }
        let mut adj = vec![[(usize::MAX, 0); 3]; tris.len()];
        for &((a, b), f, k) in &edges {
            match edges.binary_search_by(|e| e.0.cmp(&(b, a))) {
                Ok(i) => adj[f][k] = (edges[i].1, edges[i].2),
                Err(_) => {
                    return Err(GeoError::InvalidSpace(alloc::format!(
                        "edge ({a}, {b}) of face {f} has no partner; the mesh must be closed"
                    )))
                }
            }
        }
        Ok(adj)
    }

    fn from_parts(
        tris: Vec<[usize; 3]>,
        lens: Vec<[f64; 3]>,
        adj: Vec<[(usize, usize); 3]>,
        sheets: Option<Vec<SheetFace>>,
    ) -> Result<Self> {
        if tris.is_empty() {
            return Err(GeoError::InvalidSpace("mesh has no triangles".into()));
        }
        let n_v = tris.iter().flat_map(|t| t.iter()).max().map_or(0, |m| m + 1);
        let mut layout = Vec::with_capacity(tris.len());
        let mut corner = Vec::with_capacity(tris.len());
        let mut scale: f64 = 0.0;
        for (f, l) in lens.iter().enumerate() {
            for k in 0..3 {
                let (a, b, c) = (l[k], l[(k + 1) % 3], l[(k + 2) % 3]);
                if !(a > 0.0 && a.is_finite()) || a >= b + c {
                    return Err(GeoError::InvalidSpace(alloc::format!(
                        "face {f} violates the strict triangle inequality"
                    )));
                }
                scale = scale.max(a);
            }
            let (l0, l1, l2) = (l[0], l[1], l[2]);
            let x = (l2 * l2 + l0 * l0 - l1 * l1) / (2.0 * l0);
            let y = (l2 * l2 - x * x).max(0.0).sqrt();
            layout.push([[0.0, 0.0], [l0, 0.0], [x, y]]);
            let mut ang = [0.0; 3];
            for k in 0..3 {
                ang[k] = comparison_angle(0.0, l[k], l[(k + 1) % 3], l[(k + 2) % 3])?;
            }
            corner.push(ang);
        }
        for f in 0..tris.len() {
            for k in 0..3 {
                let (g, j) = adj[f][k];
                if g >= tris.len() || adj[g][j] != (f, k) {
                    return Err(GeoError::InvalidSpace(alloc::format!("inconsistent adjacency at face {f}")));
                }
                if tris[g][j] != tris[f][(k + 1) % 3] || tris[g][(j + 1) % 3] != tris[f][k] {
                    return Err(GeoError::InvalidSpace(alloc::format!(
                        "faces {f} and {g} are glued with inconsistent orientation"
                    )));
                }
                if (lens[f][k] - lens[g][j]).abs() > 1e-9 * scale.max(1.0) {
                    return Err(GeoError::InvalidSpace(alloc::format!(
                        "shared edge of faces {f} and {g} has two different lengths"
                    )));
                }
            }
        }
        let mut stars = vec![Vec::new(); n_v];
        let mut star_index = vec![[usize::MAX; 3]; tris.len()];
        let mut counts = vec![0usize; n_v];
        for t in &tris {
            for &v in t {
                counts[v] += 1;
            }
        }
        for f in 0..tris.len() {
            for k in 0..3 {
                let v = tris[f][k];
                if !stars[v].is_empty() {
                    continue;
                }
                let mut cur = (f, k);
                loop {
                    star_index[cur.0][cur.1] = stars[v].len();
                    stars[v].push(cur);
                    let (g, j) = adj[cur.0][(cur.1 + 2) % 3];
                    cur = (g, j);
                    if cur == (f, k) || stars[v].len() > counts[v] {
                        break;
                    }
                }
                if stars[v].len() != counts[v] {
                    return Err(GeoError::InvalidSpace(alloc::format!(
                        "vertex {v} is not a manifold point (its corners form several fans)"
                    )));
                }
            }
        }
        let mut offsets = Vec::with_capacity(n_v);
        let mut angles = Vec::with_capacity(n_v);
        for (v, star) in stars.iter().enumerate() {
            if star.is_empty() {
                return Err(GeoError::InvalidSpace(alloc::format!("vertex {v} is not used by any triangle")));
            }
            let mut o = Vec::with_capacity(star.len() + 1);
            let mut acc = 0.0;
            o.push(0.0);
            for &(f, k) in star {
                acc += corner[f][k];
                o.push(acc);
            }
            if acc > TAU + 1e-9 {
                return Err(GeoError::Curvature(alloc::format!(
                    "vertex {v} has cone angle {acc} > 2π"
                )));
            }
            offsets.push(o);
            angles.push(acc);
        }
        let graph = Self::build_graph(&tris, &layout, &adj, n_v);
        Ok(Mesh { tris, lens, layout, adj, corner, stars, offsets, star_index, angles, sheets, graph, scale, depth: 12 })
    }

    fn build_graph(tris: &[[usize; 3]], layout: &[[P2; 3]], adj: &[[(usize, usize); 3]], n_v: usize) -> Graph {
        let mut n = n_v;
        let mut edge_base = vec![[usize::MAX; 3]; tris.len()];
        let mut face_nodes: Vec<Vec<(usize, P2)>> = vec![Vec::new(); tris.len()];
        for f in 0..tris.len() {
            for k in 0..3 {
                face_nodes[f].push((tris[f][k], layout[f][k]));
            }
        }
        for f in 0..tris.len() {
            for k in 0..3 {
                let (g, j) = adj[f][k];
                let base = if edge_base[g][j] != usize::MAX {
                    None
                } else {
                    edge_base[f][k] = n;
                    n += SUBDIV - 1;
                    Some(edge_base[f][k])
                };
                let (a, b) = (layout[f][k], layout[f][(k + 1) % 3]);
                for i in 1..SUBDIV {
                    let t = i as f64 / SUBDIV as f64;
                    let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                    let id = match base {
                        Some(b0) => b0 + i - 1,
                        None => edge_base[g][j] + (SUBDIV - i) - 1,
                    };
                    face_nodes[f].push((id, x));
                }
            }
        }
        let mut node_faces = vec![Vec::new(); n];
        for (f, nodes) in face_nodes.iter().enumerate() {
            for &(id, _) in nodes {
                node_faces[id].push(f);
            }
        }
        Graph { n_nodes: n, face_nodes, node_faces }
    }

    /// Doubles a convex polygon: each sheet is fanned from vertex 0 and sheet 1
    /// carries the reversed orientation.
    pub fn double_polygon(poly: &super::Polygon) -> Result<Self> {
        let v = &poly.vertices;
        let n = v.len();
        let m = n - 2;
        let mut tris = Vec::with_capacity(2 * m);
        let mut sheets = Vec::with_capacity(2 * m);
        for i in 1..=m {
            tris.push([0, i, i + 1]);
            sheets.push(SheetFace { sheet: 0, corners: [v[0], v[i], v[i + 1]] });
        }
        for i in 1..=m {
            tris.push([0, i + 1, i]);
            sheets.push(SheetFace { sheet: 1, corners: [v[0], v[i + 1], v[i]] });
        }
        let t = |i: usize| i - 1;
        let u = |i: usize| m + i - 1;
        let mut adj = vec![[(0, 0); 3]; 2 * m];
        for i in 1..=m {
            adj[t(i)][0] = if i == 1 { (u(1), 2) } else { (t(i - 1), 2) };
            adj[t(i)][1] = (u(i), 1);
            adj[t(i)][2] = if i == m { (u(m), 0) } else { (t(i + 1), 0) };
            adj[u(i)][0] = if i == m { (t(m), 2) } else { (u(i + 1), 2) };
            adj[u(i)][1] = (t(i), 1);
            adj[u(i)][2] = if i == 1 { (t(1), 0) } else { (u(i - 1), 0) };
        }
        let lens = sheets
            .iter()
            .map(|s| {
                let c = s.corners;
                [norm(sub(c[1], c[0])), norm(sub(c[2], c[1])), norm(sub(c[0], c[2]))]
            })
            .collect();
        Self::from_parts(tris, lens, adj, Some(sheets))
    }

    /// Sets the unfolding depth cap (edge crossings).
    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth.max(1);
        self
    }

    pub fn n_faces(&self) -> usize {
        self.tris.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.angles.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.tris
    }

    pub fn edge_lengths(&self) -> &[[f64; 3]] {
        &self.lens
    }

    pub fn face_layout(&self, f: usize) -> [P2; 3] {
        self.layout[f]
    }

    pub fn sheets(&self) -> Option<&[SheetFace]> {
        self.sheets.as_deref()
    }

    /// Total angle around vertex `v`.
    pub fn vertex_angle(&self, v: usize) -> f64 {
        self.angles[v]
    }

    /// Canonical point for vertex `v`.
    pub fn vertex_point(&self, v: usize) -> Point {
        let (f, k) = self.stars[v][0];
        let mut bary = [0.0; 3];
        bary[k] = 1.0;
        Point::Mesh { face: f, bary }
    }

    /// Diameter bound: the largest distance between vertices.
    pub fn vertex_diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in 0..self.n_vertices() {
            for b in a + 1..self.n_vertices() {
                d = d.max(self.distance(&self.vertex_point(a), &self.vertex_point(b)));
            }
        }
        d
    }

    pub fn cone_points(&self) -> Vec<(Point, f64)> {
        (0..self.n_vertices())
            .filter(|&v| self.angles[v] < TAU - 1e-9)
            .map(|v| (self.vertex_point(v), self.angles[v]))
            .collect()
    }

    fn parts(p: &Point) -> (usize, [f64; 3]) {
        match *p {
            Point::Mesh { face, bary } => (face, bary),
            _ => (usize::MAX, [f64::NAN; 3]),
        }
    }

    pub fn locus(&self, p: &Point) -> MeshLocus {
        let (f, b) = Self::parts(p);
        for k in 0..3 {
            if b[k] >= 1.0 - SNAP {
                return MeshLocus::Vertex(self.tris[f][k]);
            }
        }
        for k in 0..3 {
            if b[k] <= SNAP {
                return MeshLocus::Edge(f, (k + 1) % 3);
            }
        }
        MeshLocus::Face(f)
    }

    pub fn check_point(&self, p: &Point) -> Result<Point> {
        let Point::Mesh { face, bary } = *p else {
            return Err(GeoError::InvalidPoint("expected a mesh point (face, barycentric)".into()));
        };
        if face >= self.tris.len() {
            return Err(GeoError::InvalidPoint(alloc::format!("face {face} does not exist")));
        }
        let s: f64 = bary.iter().sum();
        if bary.iter().any(|&b| !(b >= -1e-9)) || (s - 1.0).abs() > 1e-6 {
            return Err(GeoError::InvalidPoint("barycentric weights must be ≥ 0 and sum to 1".into()));
        }
        let b = [bary[0].max(0.0) / s, bary[1].max(0.0) / s, bary[2].max(0.0) / s];
        let q = Point::Mesh { face, bary: b };
        Ok(match self.locus(&q) {
            MeshLocus::Vertex(v) => self.vertex_point(v),
            _ => q,
        })
    }

    fn pos(&self, f: usize, b: [f64; 3]) -> P2 {
        let l = &self.layout[f];
        [
            b[0] * l[0][0] + b[1] * l[1][0] + b[2] * l[2][0],
            b[0] * l[0][1] + b[1] * l[1][1] + b[2] * l[2][1],
        ]
    }

    fn bary(&self, f: usize, x: P2) -> [f64; 3] {
        let l = &self.layout[f];
        let area = cross(sub(l[1], l[0]), sub(l[2], l[0]));
        let b0 = cross(sub(l[1], x), sub(l[2], x)) / area;
        let b1 = cross(sub(l[2], x), sub(l[0], x)) / area;
        let b = [b0.max(0.0), b1.max(0.0), (1.0 - b0 - b1).max(0.0)];
        let s = b[0] + b[1] + b[2];
        [b[0] / s, b[1] / s, b[2] / s]
    }

    fn transfer(&self, f: usize, e: usize) -> (usize, Rigid) {
        let (g, j) = self.adj[f][e];
        let a = self.layout[f][e];
        let b = self.layout[f][(e + 1) % 3];
        let a2 = self.layout[g][(j + 1) % 3];
        let b2 = self.layout[g][j];
        let d1 = sub(b, a);
        let d2 = sub(b2, a2);
        let rot = d2[1].atan2(d2[0]) - d1[1].atan2(d1[0]);
        let (s, c) = rot.sin_cos();
        let ra = [c * a[0] - s * a[1], s * a[0] + c * a[1]];
        (g, Rigid { rot, c, s, t: sub(a2, ra) })
    }

    fn inward_normal(&self, f: usize, e: usize) -> P2 {
        let d = sub(self.layout[f][(e + 1) % 3], self.layout[f][e]);
        let l = norm(d);
        [-d[1] / l, d[0] / l]
    }

    fn height(&self, f: usize, e: usize, x: P2) -> f64 {
        dot(self.inward_normal(f, e), sub(x, self.layout[f][e]))
    }

    fn corner_start(&self, f: usize, k: usize) -> f64 {
        let d = sub(self.layout[f][(k + 1) % 3], self.layout[f][k]);
        d[1].atan2(d[0])
    }

    /// Face, corner and face-frame angle of the star coordinate `s` at `v`.
    fn vertex_dir(&self, v: usize, s: f64) -> (usize, usize, f64) {
        let o = &self.offsets[v];
        let s = s.rem_euclid(self.angles[v]);
        let i = match o.iter().position(|&x| x > s) {
            Some(i) => i.saturating_sub(1),
            None => o.len() - 2,
        }
        .min(self.stars[v].len() - 1);
        let (f, k) = self.stars[v][i];
        (f, k, self.corner_start(f, k) + (s - o[i]))
    }

    /// Star coordinate at `v` of the face-frame angle `a` in corner `(f, k)`.
    fn star_coord(&self, v: usize, f: usize, k: usize, a: f64) -> f64 {
        let i = self.star_index[f][k];
        let c = self.corner[f][k];
        let mut rel = (a - self.corner_start(f, k)).rem_euclid(TAU);
        if rel > c {
            rel = if rel - c < TAU - rel { c } else { 0.0 };
        }
        (self.offsets[v][i] + rel).rem_euclid(self.angles[v])
    }

    pub fn sigma(&self, p: &Point) -> Sigma {
        match self.locus(p) {
            MeshLocus::Vertex(v) => Sigma::circle(self.angles[v]),
            _ => Sigma::circle(TAU),
        }
    }

    pub fn step(&self, p: &Point, dir: f64, len: f64) -> StepOutcome {
        let (mut f, b) = Self::parts(p);
        let (mut x, mut a) = match self.locus(p) {
            MeshLocus::Vertex(v) => {
                let (g, k, a) = self.vertex_dir(v, dir);
                f = g;
                (self.layout[g][k], a)
            }
            _ => (self.pos(f, b), dir),
        };
        let tolv = SNAP * self.scale.max(1.0);
        let mut left = len;
        let mut traveled = 0.0;
        for _ in 0..100_000 {
            let u = [a.cos(), a.sin()];
            let mut t_exit = f64::INFINITY;
            let mut e_exit = 0;
            for e in 0..3 {
                let n = self.inward_normal(f, e);
                let nu = dot(n, u);
                if nu < -1e-12 {
                    let t = self.height(f, e, x).max(0.0) / -nu;
                    if t < t_exit {
                        t_exit = t;
                        e_exit = e;
                    }
                }
            }
            if left <= t_exit {
                x = [x[0] + left * u[0], x[1] + left * u[1]];
                traveled += left;
                break;
            }
            let xe = [x[0] + t_exit * u[0], x[1] + t_exit * u[1]];
            traveled += t_exit;
            left -= t_exit;
            for kk in [e_exit, (e_exit + 1) % 3] {
                if norm(sub(xe, self.layout[f][kk])) < tolv {
                    let v = self.tris[f][kk];
                    return StepOutcome {
                        end: self.vertex_point(v),
                        traveled,
                        back_dir: self.star_coord(v, f, kk, a + PI),
                        event: StepEvent::Vertex,
                    };
                }
            }
            let (g, rg) = self.transfer(f, e_exit);
            x = rg.apply(xe);
            a += rg.rot;
            f = g;
            if left <= 0.0 {
                break;
            }
        }
        let end = Point::Mesh { face: f, bary: self.bary(f, x) };
        if let MeshLocus::Vertex(v) = self.locus(&end) {
            let k = (0..3).find(|&k| self.tris[f][k] == v).unwrap_or(0);
            return StepOutcome {
                end: self.vertex_point(v),
                traveled,
                back_dir: self.star_coord(v, f, k, a + PI),
                event: StepEvent::Vertex,
            };
        }
        StepOutcome { end, traveled, back_dir: (a + PI).rem_euclid(TAU), event: StepEvent::None }
    }

    /// Faces containing `p` with its position in each layout.
    fn images(&self, p: &Point) -> Vec<(usize, P2, Option<usize>, f64)> {
        let (f, b) = Self::parts(p);
        match self.locus(p) {
            MeshLocus::Vertex(v) => self.stars[v]
                .iter()
                .enumerate()
                .map(|(i, &(g, k))| (g, self.layout[g][k], Some(i), 0.0))
                .collect(),
            MeshLocus::Edge(_, e) => {
                let x = self.pos(f, b);
                let (g, r) = self.transfer(f, e);
                vec![(f, x, None, 0.0), (g, r.apply(x), None, r.rot)]
            }
            MeshLocus::Face(_) => vec![(f, self.pos(f, b), None, 0.0)],
        }
    }

    fn source_dir(&self, p: &Point, starts: &[Start], start: usize, angle_in_face: f64, rot: f64) -> f64 {
        let st = &starts[start];
        match (self.locus(p), st.corner) {
            (MeshLocus::Vertex(v), Some(_)) => {
                let k = (0..3).find(|&k| self.tris[st.face][k] == v).unwrap_or(0);
                self.star_coord(v, st.face, k, angle_in_face - rot)
            }
            _ => (angle_in_face - rot - st.rot).rem_euclid(TAU),
        }
    }

    fn unfold(&self, p: &Point, q: &Point, want_dirs: bool) -> Unfolding {
        let targets = self.images(q);
        let starts: Vec<Start> = self
            .images(p)
            .into_iter()
            .map(|(face, pos, corner, rot)| Start { face, pos, corner, rot })
            .collect();
        let tol = 1e-9 * self.scale.max(1.0);
        let mut best = f64::INFINITY;
        let mut cands: Vec<(f64, f64)> = Vec::new();
        let mut heap = BinaryHeap::new();
        let mut cut_lb: Option<f64> = None;
        let consider = |d: f64, dir: f64, best: &mut f64, cands: &mut Vec<(f64, f64)>| {
            if d < *best - tol {
                cands.retain(|c| c.0 <= d + tol);
            }
            if d <= *best + tol {
                cands.push((d, dir));
            }
            if d < *best {
                *best = d;
            }
        };
        for (si, st) in starts.iter().enumerate() {
            for &(tf, tx, _, _) in &targets {
                if tf == st.face {
                    let d = norm(sub(tx, st.pos));
                    let dir = if want_dirs && d > 0.0 {
                        let w = sub(tx, st.pos);
                        self.source_dir(p, &starts, si, w[1].atan2(w[0]), 0.0)
                    } else {
                        0.0
                    };
                    consider(d, dir, &mut best, &mut cands);
                }
            }
            for e in 0..3 {
                if self.height(st.face, e, st.pos) <= tol {
                    continue;
                }
                let a = self.layout[st.face][e];
                let b = self.layout[st.face][(e + 1) % 3];
                self.push_child(&mut heap, &mut cut_lb, st.face, e, st.pos, a, b, 0.0, si, 1);
            }
        }
        let mut budget = WINDOW_BUDGET;
        while let Some(w) = heap.pop() {
            if w.lb > best + tol {
                break;
            }
            if budget == 0 {
                cut_lb = Some(cut_lb.map_or(w.lb, |c| c.min(w.lb)));
                break;
            }
            budget -= 1;
            let sa = sub(w.a, w.src);
            let sb = sub(w.b, w.src);
            for &(tf, tx, _, _) in &targets {
                if tf != w.face {
                    continue;
                }
                let sq = sub(tx, w.src);
                let nq = norm(sq);
                if nq == 0.0 {
                    continue;
                }
                let c1 = cross(sa, sq) / (norm(sa) * nq).max(1e-300);
                let c2 = cross(sq, sb) / (norm(sb) * nq).max(1e-300);
                if c1 >= -1e-12 && c2 >= -1e-12 {
                    let dir = if want_dirs { self.source_dir(p, &starts, w.start, sq[1].atan2(sq[0]), w.rot) } else { 0.0 };
                    consider(nq, dir, &mut best, &mut cands);
                }
            }
            let entry = (0..3)
                .min_by(|&i, &j| {
                    let hi = self.height(w.face, i, w.a).abs() + self.height(w.face, i, w.b).abs();
                    let hj = self.height(w.face, j, w.a).abs() + self.height(w.face, j, w.b).abs();
                    hi.total_cmp(&hj)
                })
                .unwrap_or(0);
            for e in 0..3 {
                if e == entry {
                    continue;
                }
                let pp = self.layout[w.face][e];
                let qq = self.layout[w.face][(e + 1) % 3];
                let f0 = [cross(sa, sub(pp, w.src)), cross(sub(pp, w.src), sb)];
                let f1 = [cross(sa, sub(qq, w.src)), cross(sub(qq, w.src), sb)];
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                let mut empty = false;
                for c in 0..2 {
                    let (v0, v1) = (f0[c], f1[c]);
                    let scale = (norm(sa) + norm(sb)) * norm(sub(qq, pp)) * 1e-12;
                    if v0 >= -scale && v1 >= -scale {
                        continue;
                    }
                    if v0 < -scale && v1 < -scale {
                        empty = true;
                        break;
                    }
                    let t = v0 / (v0 - v1);
                    if v0 < 0.0 {
                        lo = lo.max(t);
                    } else {
                        hi = hi.min(t);
                    }
                }
                if empty || lo > hi {
                    continue;
                }
                let a = [pp[0] + lo * (qq[0] - pp[0]), pp[1] + lo * (qq[1] - pp[1])];
                let b = [pp[0] + hi * (qq[0] - pp[0]), pp[1] + hi * (qq[1] - pp[1])];
                self.push_child(&mut heap, &mut cut_lb, w.face, e, w.src, a, b, w.rot, w.start, w.depth + 1);
            }
        }
        Unfolding { best, dirs: cands, cut_lb }
    }

    #[allow(clippy::too_many_arguments)]
    fn push_child(
        &self,
        heap: &mut BinaryHeap<Window>,
        cut_lb: &mut Option<f64>,
        f: usize,
        e: usize,
        src: P2,
        a: P2,
        b: P2,
        rot: f64,
        start: usize,
        depth: usize,
    ) {
        let tol = 1e-12 * self.scale.max(1.0);
        if norm(sub(b, a)) <= tol || self.height(f, e, src) <= tol {
            return;
        }
        let (g, r) = self.transfer(f, e);
        let s2 = r.apply(src);
        let (mut a2, mut b2) = (r.apply(a), r.apply(b));
        if cross(sub(a2, s2), sub(b2, s2)) < 0.0 {
            core::mem::swap(&mut a2, &mut b2);
        }
        let lb = seg_dist(s2, a2, b2);
        if depth > self.depth {
            *cut_lb = Some(cut_lb.map_or(lb, |c| c.min(lb)));
            return;
        }
        heap.push(Window { face: g, src: s2, a: a2, b: b2, rot: rot + r.rot, start, depth, lb });
    }

    /// Upper bound from Dijkstra on the subdivided edge graph.
    pub fn graph_distance(&self, p: &Point, q: &Point) -> f64 {
        let g = &self.graph;
        let src = g.n_nodes;
        let dst = g.n_nodes + 1;
        let sp = self.images(p);
        let tq = self.images(q);
        let mut best = f64::INFINITY;
        for &(f, x, _, _) in &sp {
            for &(h, y, _, _) in &tq {
                if f == h {
                    best = best.min(norm(sub(x, y)));
                }
            }
        }
        let n = g.n_nodes + 2;
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[src] = 0.0;
        loop {
            let mut u = usize::MAX;
            let mut du = f64::INFINITY;
            for i in 0..n {
                if !done[i] && dist[i] < du {
                    du = dist[i];
                    u = i;
                }
            }
            if u == usize::MAX || u == dst || du >= best {
                break;
            }
            done[u] = true;
            let relax = |dist: &mut Vec<f64>, i: usize, d: f64| {
                if d < dist[i] {
                    dist[i] = d;
                }
            };
            if u == src {
                for &(f, x, _, _) in &sp {
                    for &(id, y) in &g.face_nodes[f] {
                        relax(&mut dist, id, norm(sub(x, y)));
                    }
                }
                continue;
            }
            for &f in &g.node_faces[u] {
                let xu = g.face_nodes[f].iter().find(|n| n.0 == u).map(|n| n.1).unwrap_or([0.0, 0.0]);
                for &(id, y) in &g.face_nodes[f] {
                    relax(&mut dist, id, du + norm(sub(xu, y)));
                }
                for &(h, y, _, _) in &tq {
                    if h == f {
                        relax(&mut dist, dst, du + norm(sub(xu, y)));
                    }
                }
            }
        }
        best.min(dist[dst])
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let u = self.unfold(p, q, false);
        if u.best.is_finite() {
            u.best
        } else {
            self.graph_distance(p, q)
        }
    }

    pub fn distance_certified(&self, p: &Point, q: &Point) -> Certified {
        let u = self.unfold(p, q, false);
        let value = u.best.min(self.graph_distance(p, q));
        let error = match u.cut_lb {
            Some(lb) => (value - lb).max(0.0),
            None => 0.0,
        };
        Certified { value, error }
    }

    pub fn directions_to(&self, p: &Point, q: &Point) -> Vec<f64> {
        let u = self.unfold(p, q, true);
        if !(u.best > 0.0) {
            return Vec::new();
        }
        let period = self.sigma(p).len;
        dedupe_circle(u.dirs.into_iter().map(|c| c.1).collect(), period)
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let areas: Vec<f64> = self
            .layout
            .iter()
            .map(|l| cross(sub(l[1], l[0]), sub(l[2], l[0])) / 2.0)
            .collect();
        let total: f64 = areas.iter().sum();
        let mut t = rng.gen::<f64>() * total;
        let mut f = 0;
        for (i, a) in areas.iter().enumerate() {
            f = i;
            if t < *a {
                break;
            }
            t -= a;
        }
        let r1: f64 = rng.gen::<f64>().sqrt();
        let r2: f64 = rng.gen();
        let b = [1.0 - r1, r1 * (1.0 - r2), r1 * r2];
        Point::Mesh { face: f, bary: b }
    }

    /// Projection of a doubled polygon onto the base polygon.
    pub fn project(&self, p: &Point) -> Result<Point> {
        let sheets = self.sheets.as_ref().ok_or_else(|| GeoError::Unsupported("mesh is not a doubling".into()))?;
        let (f, b) = Self::parts(p);
        let c = &sheets[f].corners;
        Ok(Point::Plane {
            x: b[0] * c[0][0] + b[1] * c[1][0] + b[2] * c[2][0],
            y: b[0] * c[0][1] + b[1] * c[1][1] + b[2] * c[2][1],
        })
    }

    /// The points of a doubled polygon lying over `base`, one per sheet.
    pub fn lift(&self, base: &Point) -> Result<Vec<Point>> {
        let sheets = self.sheets.as_ref().ok_or_else(|| GeoError::Unsupported("mesh is not a doubling".into()))?;
        let Point::Plane { x, y } = *base else {
            return Err(GeoError::InvalidPoint("expected a planar point".into()));
        };
        let mut out: Vec<Point> = Vec::new();
        for sheet in 0..2u8 {
            for (f, s) in sheets.iter().enumerate() {
                if s.sheet != sheet {
                    continue;
                }
                let c = s.corners;
                let area = cross(sub(c[1], c[0]), sub(c[2], c[0]));
                let b0 = cross(sub(c[1], [x, y]), sub(c[2], [x, y])) / area;
                let b1 = cross(sub(c[2], [x, y]), sub(c[0], [x, y])) / area;
                let b2 = 1.0 - b0 - b1;
                if b0 >= -1e-12 && b1 >= -1e-12 && b2 >= -1e-12 {
                    let p = self.check_point(&Point::Mesh { face: f, bary: [b0.max(0.0), b1.max(0.0), b2.max(0.0)] })?;
                    if out.iter().all(|o| self.distance(o, &p) > 1e-12) {
                        out.push(p);
                    }
                    break;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tetra() -> Mesh {
        let s = 1.0 / 8f64.sqrt();
        let coords = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
            .map(|c: [f64; 3]| [c[0] * s, c[1] * s, c[2] * s]);
        let tris = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        Mesh::from_coords(&coords, &tris).unwrap()
    }

    #[test]
    fn tetrahedron_cone_angles() {
        let m = tetra();
        for v in 0..4 {
            assert_relative_eq!(m.vertex_angle(v), PI, epsilon = 1e-12);
        }
        assert_eq!(m.cone_points().len(), 4);
    }

    #[test]
    fn rejects_open_and_flipped_meshes() {
        let coords = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(Mesh::from_coords(&coords, &[[0, 1, 2], [0, 3, 1], [0, 2, 3]]).is_err());
        assert!(Mesh::from_coords(&coords, &[[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 3, 2]]).is_err());
        assert!(Mesh::from_edge_lengths(&[[0, 1, 2], [0, 2, 1]], &[[1.0, 1.0, 3.0], [1.0, 1.0, 3.0]]).is_err());
    }

    #[test]
    fn vertex_to_vertex_is_an_edge() {
        let m = tetra();
        let d = m.distance(&m.vertex_point(0), &m.vertex_point(1));
        assert_relative_eq!(d, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn opposite_edge_midpoints() {
        let m = tetra();
        let mid = |f: usize, k: usize| {
            let mut b = [0.0; 3];
            b[k] = 0.5;
            b[(k + 1) % 3] = 0.5;
            Point::Mesh { face: f, bary: b }
        };
        // Edge (0,1) and edge (2,3) on the unit regular tetrahedron.
        let p = mid(0, 0);
        let q = mid(2, 1);
        let c = m.distance_certified(&p, &q);
        assert_relative_eq!(c.value, 1.0, epsilon = 1e-12);
        assert!(c.error < 1e-12, "{c:?}");
        assert!(m.graph_distance(&p, &q) >= c.value - 1e-12);
    }

    #[test]
    fn step_follows_directions() {
        let m = tetra();
        let p = Point::Mesh { face: 0, bary: [0.2, 0.3, 0.5] };
        let q = Point::Mesh { face: 3, bary: [0.6, 0.1, 0.3] };
        let d = m.distance(&p, &q);
        for dir in m.directions_to(&p, &q) {
            let out = m.step(&p, dir, d);
            assert!(m.distance(&out.end, &q) < 1e-9);
            let back = m.step(&out.end, out.back_dir, d);
            assert!(m.distance(&back.end, &p) < 1e-9);
        }
    }

    #[test]
    fn doubled_square() {
        let sq = super::super::Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let m = Mesh::double_polygon(&sq).unwrap();
        assert_eq!(m.cone_points().len(), 4);
        for (_, a) in m.cone_points() {
            assert_relative_eq!(a, PI, epsilon = 1e-12);
        }
        let base = Point::Plane { x: 0.3, y: 0.6 };
        let lifts = m.lift(&base).unwrap();
        assert_eq!(lifts.len(), 2);
        for l in &lifts {
            let Point::Plane { x, y } = m.project(l).unwrap() else { panic!() };
            assert_relative_eq!(x, 0.3, epsilon = 1e-12);
            assert_relative_eq!(y, 0.6, epsilon = 1e-12);
        }
        assert_relative_eq!(m.distance(&lifts[0], &lifts[1]), 0.6, epsilon = 1e-12);
    }
}
