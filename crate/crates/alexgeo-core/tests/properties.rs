use alexgeo_core::flow::gradient_curve;
use alexgeo_core::model_plane::{comparison_angle, model_side};
use alexgeo_core::quasigeodesic::{check_quasigeodesic, trace_quasigeodesic, QgCheckOptions};
use alexgeo_core::radial::{gexp_map, tangent_cone_metric};
use alexgeo_core::tangent::{differential, gradient, polar_vector, supporting_check, supporting_vector};
use alexgeo_core::{Expr, Point, Sigma, Space, TangentVec};
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

fn kappa() -> impl Strategy<Value = f64> {
    prop_oneof![Just(-1.0), Just(0.0), Just(1.0)]
}

fn cone_angle() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5 * PI), Just(PI), Just(4.0), Just(1.5 * PI), Just(TAU)]
}

fn polar() -> impl Strategy<Value = (f64, f64)> {
    (0.05f64..2.0, 0.0f64..1.0)
}

fn on_cone(theta: f64, (r, u): (f64, f64)) -> Point {
    Point::Polar { r, phi: u * theta }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn side_angle_round_trip(k in kappa(), a in 0.05f64..1.4, c in 0.05f64..1.4, beta in 0.01f64..3.13) {
        let b = model_side(k, a, c, beta).unwrap();
        let back = comparison_angle(k, a, b, c).unwrap();
        prop_assert!((back - beta).abs() < 1e-9, "κ={k} a={a} c={c} β={beta} → {back}");
    }

    #[test]
    fn angle_grows_with_opposite_side(k in kappa(), a in 0.1f64..1.4, c in 0.1f64..1.4, s in 0.0f64..1.0, ds in 0.0f64..1.0) {
        let lo = (a - c).abs();
        let hi = (a + c).min(if k > 0.0 { 2.0 * PI - a - c } else { f64::INFINITY });
        let b1 = lo + s * (hi - lo);
        let b2 = b1 + ds * (hi - b1);
        let (x, y) = (comparison_angle(k, a, b1, c).unwrap(), comparison_angle(k, a, b2, c).unwrap());
        prop_assert!(y >= x - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cone_triangle_inequality_and_toponogov(theta in cone_angle(), p in polar(), q in polar(), r in polar()) {
        let s = Space::cone(theta).unwrap();
        let (p, q, r) = (on_cone(theta, p), on_cone(theta, q), on_cone(theta, r));
        let (pq, qr, pr) = (s.distance(&p, &q), s.distance(&q, &r), s.distance(&p, &r));
        prop_assert!(pr <= pq + qr + 1e-9);
        prop_assume!(pq > 1e-6 && pr > 1e-6);
        let sig = s.sigma(&p);
        let (a, b) = (s.directions_to(&p, &q)[0], s.directions_to(&p, &r)[0]);
        let hinge = sig.dist(a, b);
        let cmp = comparison_angle(0.0, pq, qr, pr).unwrap();
        prop_assert!(hinge >= cmp - 1e-6, "hinge {hinge} < comparison {cmp}");
    }

    #[test]
    fn gradient_inequality_for_half_squared_distance(theta in cone_angle(), a in polar(), p in polar(), q in polar()) {
        let s = Space::cone(theta).unwrap();
        let (a, p, q) = (on_cone(theta, a), on_cone(theta, p), on_cone(theta, q));
        let f = Expr::scaled(0.5, Expr::DistSq(a));
        let l = s.distance(&p, &q);
        prop_assume!(l > 1e-4);
        let g = gradient(&f, &s, &p).unwrap();
        let up = TangentVec::new(1.0, s.directions_to(&p, &q)[0], s.sigma(&p));
        let rhs = (f.eval(&s, &q) - f.eval(&s, &p) - 0.5 * l * l) / l;
        prop_assert!(up.dot(&g) >= rhs - 1e-6);
    }

    #[test]
    fn polar_pairs_bound_differentials(theta in cone_angle(), a in polar(), p in polar(), ang in 0.0f64..1.0, norm in 0.1f64..2.0) {
        let s = Space::cone(theta).unwrap();
        let (a, p) = (on_cone(theta, a), on_cone(theta, p));
        let sig = s.sigma(&p);
        let u = TangentVec::new(norm, ang * sig.len, sig);
        let v = polar_vector(&u).unwrap();
        let df = differential(&Expr::scaled(0.5, Expr::DistSq(a)), &s, &p);
        prop_assert!(df.at_vec(&u) + df.at_vec(&v) <= 1e-9);
    }

    #[test]
    fn supporting_vectors_dominate_gradients(theta in cone_angle(), a in polar(), p in polar()) {
        let s = Space::cone(theta).unwrap();
        let (a, p) = (on_cone(theta, a), on_cone(theta, p));
        let f = Expr::DistSq(a);
        let sv = supporting_vector(&f, &s, &p);
        prop_assert!(supporting_check(&f, &s, &p, &sv, 1e-9).passed);
        prop_assert!(sv.norm >= gradient(&f, &s, &p).unwrap().norm - 1e-9);
    }

    #[test]
    fn narrow_directions_give_zero_gradient(theta in 0.2f64..PI, a in polar()) {
        let s = Space::cone(theta).unwrap();
        let g = gradient(&Expr::Dist(on_cone(theta, a)), &s, &Point::Polar { r: 0.0, phi: 0.0 }).unwrap();
        prop_assert_eq!(g.norm, 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn concave_flows_do_not_expand(x0 in 0.05f64..0.95, y0 in 0.05f64..0.95, x1 in 0.05f64..0.95, y1 in 0.05f64..0.95) {
        let s = Space::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let (p, q) = (Point::Plane { x: x0, y: y0 }, Point::Plane { x: x1, y: y1 });
        let f = Expr::DistBoundary;
        let a = gradient_curve(&f, &s, &p, 0.3, 1e-3).unwrap();
        let b = gradient_curve(&f, &s, &q, 0.3, 1e-3).unwrap();
        prop_assert!(s.distance(&a.end(), &b.end()) <= s.distance(&p, &q) + 1e-9);
    }

    #[test]
    fn gexp_is_short_on_cones(theta in cone_angle(), r1 in 0.1f64..1.0, a1 in 0.0f64..1.0, r2 in 0.1f64..1.0, a2 in 0.0f64..1.0) {
        let s = Space::cone(theta).unwrap();
        let p = Point::Polar { r: 1.0, phi: 0.0 };
        let sig = s.sigma(&p);
        let (u, v) = (TangentVec::new(r1, a1 * sig.len, sig), TangentVec::new(r2, a2 * sig.len, sig));
        let (x, y) = (gexp_map(&s, &p, &u, 0.0, 1e-3).unwrap(), gexp_map(&s, &p, &v, 0.0, 1e-3).unwrap());
        prop_assert!(s.distance(&x, &y) <= tangent_cone_metric(0.0, &u, &v).unwrap() + 1e-3);
    }

    #[test]
    fn gexp_inverts_log(theta in cone_angle(), q in polar()) {
        let s = Space::cone(theta).unwrap();
        let p = Point::Polar { r: 0.7, phi: 0.0 };
        let q = on_cone(theta, q);
        let v = s.log_map(&p, &q);
        let x = gexp_map(&s, &p, &v, 0.0, 1e-3).unwrap();
        prop_assert!(s.distance(&x, &q) < 1e-8);
    }

    #[test]
    fn equal_split_traces_are_quasigeodesics(theta in cone_angle(), r in 0.3f64..1.5, dir in 0.0f64..TAU) {
        let s = Space::cone(theta).unwrap();
        let p = Point::Polar { r, phi: 0.0 };
        let c = trace_quasigeodesic(&s, &p, dir, 3.0, 0.01).unwrap();
        let rep = check_quasigeodesic(&s, &c, &QgCheckOptions { n_probes: 8, ..Default::default() });
        prop_assert!(rep.passed, "{:?}", rep);
    }
}

#[test]
fn sigma_distance_is_symmetric_and_bounded() {
    let s = Sigma::circle(1.5 * PI);
    for i in 0..100 {
        for j in 0..100 {
            let (a, b) = (i as f64 * 0.047, j as f64 * 0.047);
            assert!((s.dist(a, b) - s.dist(b, a)).abs() < 1e-15);
            assert!(s.dist(a, b) <= 0.75 * PI + 1e-15);
        }
    }
}

#[test]
fn radial_curves_tangent_to_the_boundary_stay_on_it() {
    use alexgeo_core::radial::radial_curve;
    let s = Space::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
    let p = Point::Plane { x: 0.3, y: 0.0 };
    for xi in [0.0, PI] {
        let c = radial_curve(&s, &p, xi, 0.0, 0.25, 1e-3).unwrap();
        for x in &c.points {
            assert!(s.boundary_feet(x).unwrap().0 < 1e-12);
        }
    }
    let cap = Space::cap(1.0).unwrap();
    let p = Point::Polar { r: 1.0, phi: 0.5 };
    let c = alexgeo_core::flow::gradient_curve(&Expr::Dist(Point::Polar { r: 0.4, phi: 0.0 }), &cap, &p, 0.5, 1e-3).unwrap();
    for x in &c.points {
        assert!(cap.boundary_feet(x).unwrap().0 < 1e-12);
    }
}
