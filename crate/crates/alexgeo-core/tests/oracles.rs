//! Values computed independently of the library (closed forms, hand
//! evaluation) and frozen here.

use alexgeo_core::flow::gradient_curve;
use alexgeo_core::functions::{InfConvolution, smooth_distance};
use alexgeo_core::model_plane::{comparison_angle, model_scalars, ScalarKind};
use alexgeo_core::spaces::Mesh;
use alexgeo_core::tangent::{gradient, milka_polar};
use alexgeo_core::{Expr, Point, Sigma, Space, TangentVec};
use approx::assert_relative_eq;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

fn polar(r: f64, phi: f64) -> Point {
    Point::Polar { r, phi }
}

fn xy(x: f64, y: f64) -> Point {
    Point::Polar { r: x.hypot(y), phi: y.atan2(x).rem_euclid(TAU) }
}

#[test]
fn model_scalar_values() {
    assert_eq!(model_scalars(ScalarKind::Rho, 0.0, 2.0).unwrap(), 2.0);
    assert_eq!(model_scalars(ScalarKind::Sigma, 0.0, 5.0).unwrap(), 5.0);
    assert_eq!(model_scalars(ScalarKind::Theta, 0.0, 3.0).unwrap(), 3.0);
    assert_relative_eq!(model_scalars(ScalarKind::Rho, 1.0, PI).unwrap(), 2.0, epsilon = 1e-15);
    assert_relative_eq!(model_scalars(ScalarKind::Theta, -1.0, 2f64.ln()).unwrap(), 0.5, epsilon = 1e-15);
}

#[test]
fn degenerate_and_spherical_angles() {
    assert_eq!(comparison_angle(0.0, 1.0, 1.0, 3.0).unwrap(), 0.0);
    assert_relative_eq!(comparison_angle(1.0, FRAC_PI_2, FRAC_PI_2, FRAC_PI_2).unwrap(), FRAC_PI_2, epsilon = 1e-12);
}

#[test]
fn cone_distances_by_law_of_cosines() {
    let c = Space::cone(PI).unwrap();
    assert_relative_eq!(c.distance(&polar(1.0, 0.0), &polar(1.0, FRAC_PI_2)), 2f64.sqrt(), epsilon = 1e-12);
    let c = Space::cone(1.5 * PI).unwrap();
    let d = c.distance(&polar(1.0, 0.0), &polar(1.0, 1.25 * PI));
    assert_relative_eq!(d, 0.765_366_864_730_179_8, epsilon = 1e-12);
}

fn regular_tetrahedron() -> Space {
    let v = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    let s = 1.0 / 8f64.sqrt();
    let coords: Vec<[f64; 3]> = v.iter().map(|p| [p[0] * s, p[1] * s, p[2] * s]).collect();
    let tris = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    Space::Mesh(Mesh::from_coords(&coords, &tris).unwrap())
}

#[test]
fn tetrahedron_and_doubled_square_cone_angles() {
    let t = regular_tetrahedron();
    let pts = t.cone_points();
    assert_eq!(pts.len(), 4);
    for (_, a) in pts {
        assert_relative_eq!(a, PI, epsilon = 1e-12);
    }
    let sq = Space::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
    let d = sq.build_doubling().unwrap();
    let pts = d.cone_points();
    assert_eq!(pts.len(), 4);
    for (_, a) in pts {
        assert_relative_eq!(a, PI, epsilon = 1e-12);
    }
}

#[test]
fn scalar_product_on_short_circle() {
    let sig = Sigma::circle(1.5 * PI);
    let u = TangentVec::new(1.0, 0.0, sig);
    let v = TangentVec::new(1.0, 0.75 * PI, sig);
    assert_relative_eq!(u.dot(&v), -(0.5f64.sqrt()), epsilon = 1e-12);
}

#[test]
fn apex_gradient_of_distance() {
    let s = Space::cone(1.5 * PI).unwrap();
    let q = polar(1.0, 0.4);
    let g = gradient(&Expr::Dist(q), &s, &polar(0.0, 0.0)).unwrap();
    assert_relative_eq!(g.norm, 0.5f64.sqrt(), epsilon = 1e-9);
    assert_relative_eq!(g.sigma.dist(g.angle, 0.4), 0.75 * PI, epsilon = 1e-6);
}

#[test]
fn milka_partner_on_three_halves_circle() {
    let v = TangentVec::new(1.0, 0.0, Sigma::circle(1.5 * PI));
    let w = milka_polar(&v);
    assert_relative_eq!(w.angle, PI, epsilon = 1e-12);
    assert_relative_eq!(v.sigma.dist(v.angle, w.angle), FRAC_PI_2, epsilon = 1e-12);
    let v = TangentVec::new(1.0, 0.3, Sigma::circle(PI));
    assert_relative_eq!(milka_polar(&v).angle, 0.3, epsilon = 1e-12);
}

#[test]
fn quadratic_flow_matches_exponential_decay() {
    let s = Space::cone(TAU).unwrap();
    let f = Expr::scaled(-0.5, Expr::DistSq(polar(0.0, 0.0)));
    let p = xy(0.6, -0.8);
    let c = gradient_curve(&f, &s, &p, 1.0, 1e-3).unwrap();
    let Point::Polar { r, phi } = c.end() else { panic!() };
    assert!((r - (-1f64).exp()).abs() < 1e-3);
    assert_relative_eq!(phi, (-0.8f64).atan2(0.6).rem_euclid(TAU), epsilon = 1e-12);
}

#[test]
fn inf_convolution_quadratic_closed_form() {
    let s = Space::cone(TAU).unwrap();
    let q = xy(0.3, -0.2);
    let f = Expr::scaled(-0.5, Expr::DistSq(q));
    let eps = 1.0;
    let ic = InfConvolution::new(&f, &s, eps).unwrap();
    let y = xy(0.1, 0.25);
    let v = ic.eval(&y);
    // Minimizer (2y − εq)/(2 − ε), value −|x−q|²/2 + |x−y|²/ε.
    let (qx, qy, yx, yy) = (0.3, -0.2, 0.1, 0.25);
    let x = ((2.0 * yx - eps * qx) / (2.0 - eps), (2.0 * yy - eps * qy) / (2.0 - eps));
    let val = -((x.0 - qx).powi(2) + (x.1 - qy).powi(2)) / 2.0 + ((x.0 - yx).powi(2) + (x.1 - yy).powi(2)) / eps;
    assert!((v.value - val).abs() < 1e-6, "{} vs {}", v.value, val);
}

#[test]
fn smoothed_distance_far_from_center() {
    let s = Space::cone(TAU).unwrap();
    let eps = 0.1;
    let f = smooth_distance(&s, &polar(0.0, 0.0), eps, 1_000_000, 7);
    let d = 1.0;
    // |y − x| ≈ d − x₁ + x₂²/(2d) and E[x₂²] = ε²/4 on the disc.
    let want = d + eps * eps / (8.0 * d);
    let got = f.eval(&s, &polar(d, 1.0));
    assert!((got - want).abs() < 1e-4, "{got} vs {want}");
    let center = f.eval(&s, &polar(0.0, 0.0));
    assert!((center - 2.0 * eps / 3.0).abs() < 1e-3);
}
