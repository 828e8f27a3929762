//! Closed-form arithmetic in the model plane Λ_κ.
//!
//! Formulas select on the sign of κ and rescale to |κ| = 1 internally, so κ is
//! any finite real.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{domain, Result};

/// A curvature bound (units of 1/length²).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Kappa(f64);

/// Sign class of a curvature bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaSign {
    Neg,
    Zero,
    Pos,
}

impl Kappa {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(domain("curvature bound must be finite"));
        }
        Ok(Kappa(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn sign(self) -> KappaSign {
        if self.0 > 0.0 {
            KappaSign::Pos
        } else if self.0 < 0.0 {
            KappaSign::Neg
        } else {
            KappaSign::Zero
        }
    }
}

/// Which scalar function [`model_scalars`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    Rho,
    Sigma,
    Theta,
}

/// Evaluates ρ_κ, σ_κ or θ_λ.
pub fn model_scalars(kind: ScalarKind, kappa_or_lambda: f64, x: f64) -> Result<f64> {
    if !x.is_finite() || !kappa_or_lambda.is_finite() {
        return Err(domain("non-finite input to a model scalar"));
    }
    Ok(match kind {
        ScalarKind::Rho => rho(kappa_or_lambda, x),
        ScalarKind::Sigma => sigma(kappa_or_lambda, x),
        ScalarKind::Theta => theta(kappa_or_lambda, x),
    })
}

/// ρ_κ(x): (1−cos(x√κ))/κ, x²/2 or (cosh(x√−κ)−1)/(−κ).
pub fn rho(kappa: f64, x: f64) -> f64 {
    if kappa > 0.0 {
        let s = (x * kappa.sqrt() / 2.0).sin();
        2.0 * s * s / kappa
    } else if kappa < 0.0 {
        let s = (x * (-kappa).sqrt() / 2.0).sinh();
        -2.0 * s * s / kappa
    } else {
        x * x / 2.0
    }
}

/// σ_κ(x) = sn_κ(x), the derivative of ρ_κ.
pub fn sigma(kappa: f64, x: f64) -> f64 {
    if kappa > 0.0 {
        let k = kappa.sqrt();
        (x * k).sin() / k
    } else if kappa < 0.0 {
        let k = (-kappa).sqrt();
        (x * k).sinh() / k
    } else {
        x
    }
}

/// cs_κ(x) = 1 − κ·ρ_κ(x).
pub fn cs(kappa: f64, x: f64) -> f64 {
    if kappa > 0.0 {
        (x * kappa.sqrt()).cos()
    } else if kappa < 0.0 {
        (x * (-kappa).sqrt()).cosh()
    } else {
        1.0
    }
}

/// θ_λ(t) = t for λ = 0, (e^{λt}−1)/λ otherwise.
pub fn theta(lambda: f64, t: f64) -> f64 {
    if lambda == 0.0 {
        t
    } else {
        (lambda * t).exp_m1() / lambda
    }
}

/// Upper limit π/√κ of lengths in Λ_κ (infinite for κ ≤ 0).
pub fn diameter(kappa: f64) -> f64 {
    if kappa > 0.0 {
        PI / kappa.sqrt()
    } else {
        f64::INFINITY
    }
}

fn scaled_sine(kappa: f64, x: f64) -> f64 {
    if kappa > 0.0 {
        x.sin()
    } else if kappa < 0.0 {
        x.sinh()
    } else {
        x
    }
}

/// The angle opposite `b` in the Λ_κ triangle with sides `a`, `b`, `c`.
///
/// Returns 0 when a+b<c or b+c<a. If a or c vanishes with b > 0 outside that
/// convention the antipodal limit π is returned. Uses the half-angle formula,
/// which stays accurate for thin triangles.
pub fn comparison_angle(kappa: f64, a: f64, b: f64, c: f64) -> Result<f64> {
    if !(kappa.is_finite() && a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(domain("non-finite comparison-angle input"));
    }
    if a < 0.0 || b < 0.0 || c < 0.0 {
        return Err(domain("negative side length"));
    }
    if kappa > 0.0 {
        let limit = 2.0 * PI / kappa.sqrt();
        if a + b + c > limit * (1.0 + 1e-12) {
            return Err(domain(format!(
                "perimeter {} exceeds 2π/√κ = {}",
                a + b + c,
                limit
            )));
        }
    }
    if a + b < c || b + c < a {
        return Ok(0.0);
    }
    if a == 0.0 || c == 0.0 {
        return Ok(if b == 0.0 { 0.0 } else { PI });
    }
    let k = kappa.abs().sqrt();
    let (a, b, c) = if kappa == 0.0 { (a, b, c) } else { (a * k, b * k, c * k) };
    let s = (a + b + c) / 2.0;
    if s - b <= 0.0 {
        return Ok(PI);
    }
    let num = scaled_sine(kappa, s - a) * scaled_sine(kappa, s - c);
    let den = scaled_sine(kappa, s) * scaled_sine(kappa, s - b);
    if den <= 0.0 {
        return Ok(PI);
    }
    Ok(2.0 * num.max(0.0).sqrt().atan2(den.sqrt()))
}

/// The side opposite the angle `beta` of a Λ_κ hinge with sides `a`, `c`.
pub fn model_side(kappa: f64, a: f64, c: f64, beta: f64) -> Result<f64> {
    if !(kappa.is_finite() && a.is_finite() && c.is_finite() && beta.is_finite()) {
        return Err(domain("non-finite model-side input"));
    }
    if a < 0.0 || c < 0.0 {
        return Err(domain("negative side length"));
    }
    if !(-1e-12..=PI + 1e-12).contains(&beta) {
        return Err(domain("hinge angle outside [0, π]"));
    }
    let beta = beta.clamp(0.0, PI);
    let hb = (beta / 2.0).sin();
    if kappa > 0.0 {
        let k = kappa.sqrt();
        if a * k >= PI || c * k >= PI {
            return Err(domain("hinge side reaches π/√κ"));
        }
        let (a, c) = (a * k, c * k);
        let hd = ((a - c) / 2.0).sin();
        let x = (hd * hd + a.sin() * c.sin() * hb * hb).clamp(0.0, 1.0);
        Ok(2.0 * x.sqrt().atan2((1.0 - x).sqrt()) / k)
    } else if kappa < 0.0 {
        let k = (-kappa).sqrt();
        let (a, c) = (a * k, c * k);
        let hd = ((a - c) / 2.0).sinh();
        let x = hd * hd + a.sinh() * c.sinh() * hb * hb;
        Ok(2.0 * x.sqrt().asinh() / k)
    } else {
        let d = a - c;
        Ok((d * d + 4.0 * a * c * hb * hb).sqrt())
    }
}

/// One sample of a development: parameter, radius and angular coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DevSample {
    pub t: f64,
    pub r: f64,
    pub phi: f64,
}

/// A κ-development in polar coordinates of Λ_κ.
///
/// `turns[i]` is the signed turn at sample `i`; positive turns bend toward the
/// base point. Endpoints and samples next to a split carry `None`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DevelopmentRecord {
    pub kappa: Kappa,
    pub samples: Vec<DevSample>,
    pub turns: Vec<Option<f64>>,
    pub convex: bool,
    pub tolerance: f64,
    /// Sample indices where the curve passes through the base point.
    pub splits: Vec<usize>,
}

impl DevelopmentRecord {
    /// Smallest recorded turn (`+∞` if none).
    pub fn min_turn(&self) -> f64 {
        self.turns
            .iter()
            .flatten()
            .fold(f64::INFINITY, |m, &t| m.min(t))
    }

    /// Worst deviation of the Λ_κ chord speed from 1 over consecutive samples.
    pub fn speed_defect(&self) -> f64 {
        let k = self.kappa.value();
        let mut worst: f64 = 0.0;
        for w in self.samples.windows(2) {
            let dt = w[1].t - w[0].t;
            if dt <= 0.0 || w[0].r <= 0.0 || w[1].r <= 0.0 {
                continue;
            }
            let dphi = (w[1].phi - w[0].phi).abs().min(PI);
            if let Ok(chord) = model_side(k, w[0].r, w[1].r, dphi) {
                worst = worst.max((chord / dt - 1.0).abs());
            }
        }
        worst
    }
}

/// Radius below which a development sample counts as a pass through the base point.
pub const APEX_RADIUS: f64 = 1e-12;

/// Develops the distance profile `r(t)` of a unit-speed curve into Λ_κ.
///
/// The angular increment between samples is the exact integral of
/// dφ/dt = √(1−r′²)/sn_κ(r) along the Λ_κ chord, so straight pieces develop
/// without discretization error. Turns come from three consecutive points.
pub fn develop_curve(kappa: f64, r_samples: &[(f64, f64)], tolerance: f64) -> Result<DevelopmentRecord> {
    let kap = Kappa::new(kappa)?;
    let n = r_samples.len();
    for w in r_samples.windows(2) {
        let (t0, r0) = w[0];
        let (t1, r1) = w[1];
        if !(t1 > t0) {
            return Err(domain("development samples must be strictly increasing in t"));
        }
        if (r1 - r0).abs() > (t1 - t0) + tolerance {
            return Err(domain(format!(
                "distance profile is not 1-Lipschitz at t = {t0}: |Δr| = {} > Δt = {}",
                (r1 - r0).abs(),
                t1 - t0
            )));
        }
    }
    for &(_, r) in r_samples {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(domain("negative or non-finite radius"));
        }
        if kappa > 0.0 && r >= diameter(kappa) {
            return Err(domain("radius reaches π/√κ"));
        }
    }
    let splits: Vec<usize> = (0..n).filter(|&i| r_samples[i].1 <= APEX_RADIUS).collect();
    let mut samples = Vec::with_capacity(n);
    let mut phi = 0.0;
    for i in 0..n {
        let (t, r) = r_samples[i];
        if i > 0 {
            let (tp, rp) = r_samples[i - 1];
            if rp > APEX_RADIUS && r > APEX_RADIUS {
                phi += comparison_angle(kappa, rp, t - tp, r)?;
            }
        }
        samples.push(DevSample { t, r, phi });
    }
    let mut turns = alloc::vec![None; n];
    let mut convex = true;
    for i in 1..n.saturating_sub(1) {
        let (tp, rp) = r_samples[i - 1];
        let (t, r) = r_samples[i];
        let (tn, rn) = r_samples[i + 1];
        if rp <= APEX_RADIUS || r <= APEX_RADIUS || rn <= APEX_RADIUS {
            continue;
        }
        let back = comparison_angle(kappa, r, rp, t - tp)?;
        let fwd = comparison_angle(kappa, r, rn, tn - t)?;
        let turn = PI - back - fwd;
        if turn < -tolerance {
            convex = false;
        }
        turns[i] = Some(turn);
    }
    Ok(DevelopmentRecord {
        kappa: kap,
        samples,
        turns,
        convex,
        tolerance,
        splits,
    })
}

/// Exact two-sided comparison for f″ ≤ λ − κ f at spacing `d`.
///
/// Returns the slack of f(t−d) + f(t+d) ≤ 2 cs_κ(d) f(t) + λ·m_κ(d), where
/// m_κ(d) = 2ρ_κ(d); positive slack means the test fails. The slack is
/// normalized by d².
pub fn second_difference_excess(kappa: f64, lambda: f64, d: f64, prev: f64, mid: f64, next: f64) -> f64 {
    let c = cs(kappa, d);
    let m = 2.0 * rho(kappa, d);
    (prev + next - 2.0 * c * mid - lambda * m) / (d * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn scalar_values() {
        assert_relative_eq!(rho(0.0, 2.0), 2.0);
        assert_relative_eq!(sigma(0.0, 5.0), 5.0);
        assert_relative_eq!(theta(0.0, 3.0), 3.0);
        assert_relative_eq!(rho(1.0, PI), 2.0, epsilon = 1e-15);
        assert_relative_eq!(theta(-1.0, 2.0f64.ln()), 0.5, epsilon = 1e-15);
        assert_relative_eq!(rho(-1.0, 1.0), 1.0f64.cosh() - 1.0, epsilon = 1e-15);
        assert!(model_scalars(ScalarKind::Rho, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn angle_examples() {
        assert_relative_eq!(comparison_angle(0.0, 1.0, 1.0, 1.0).unwrap(), PI / 3.0, epsilon = 1e-15);
        assert_eq!(comparison_angle(0.0, 1.0, 1.0, 3.0).unwrap(), 0.0);
        assert_relative_eq!(
            comparison_angle(1.0, PI / 2.0, PI / 2.0, PI / 2.0).unwrap(),
            PI / 2.0,
            epsilon = 1e-14
        );
        assert!(comparison_angle(1.0, 3.0, 3.0, 3.0).is_err());
        assert_eq!(comparison_angle(0.0, 0.0, 1.0, 2.0).unwrap(), 0.0);
        assert_eq!(comparison_angle(0.0, 0.0, 2.0, 1.0).unwrap(), PI);
    }

    #[test]
    fn side_examples() {
        assert_relative_eq!(model_side(0.0, 3.0, 4.0, PI / 2.0).unwrap(), 5.0, epsilon = 1e-15);
        assert_relative_eq!(model_side(0.0, 2.5, 1.0, 0.0).unwrap(), 1.5, epsilon = 1e-15);
        assert_relative_eq!(
            model_side(1.0, PI / 2.0, PI / 2.0, PI / 2.0).unwrap(),
            PI / 2.0,
            epsilon = 1e-14
        );
        assert!(model_side(1.0, PI, 1.0, 1.0).is_err());
        // κ = −1 right isosceles hinge: cosh b = cosh²(1)
        let b = model_side(-1.0, 1.0, 1.0, PI / 2.0).unwrap();
        assert_relative_eq!(b.cosh(), 1.0f64.cosh().powi(2), epsilon = 1e-13);
    }

    #[test]
    fn rescaling_of_kappa() {
        let b1 = model_side(4.0, 0.3, 0.5, 1.0).unwrap();
        let b2 = model_side(1.0, 0.6, 1.0, 1.0).unwrap();
        assert_relative_eq!(2.0 * b1, b2, epsilon = 1e-14);
    }

    #[test]
    fn circle_development() {
        let samples: Vec<(f64, f64)> = (0..50).map(|i| (i as f64 * 0.05, 2.0)).collect();
        let d = develop_curve(0.0, &samples, 1e-9).unwrap();
        assert!(d.convex);
        assert!(d.min_turn() > 0.0);
        assert!(d.speed_defect() < 1e-12);
    }

    #[test]
    fn segment_development_is_straight() {
        // segment y = 1 in the plane, base point at the origin
        let samples: Vec<(f64, f64)> = (0..=100)
            .map(|i| {
                let t = i as f64 * 0.03;
                let x = -1.5 + t;
                (t, (x * x + 1.0).sqrt())
            })
            .collect();
        let d = develop_curve(0.0, &samples, 1e-9).unwrap();
        assert!(d.convex);
        assert!(d.min_turn().abs() < 1e-7);
        let total = d.samples.last().unwrap().phi;
        let expected = (1.5f64).atan() + (1.5f64).atan();
        assert_relative_eq!(total, expected, epsilon = 1e-9);
    }

    #[test]
    fn concave_corner_is_detected() {
        // broken line bending away from the origin by 0.2 rad at t = 1
        let start = (-1.0f64, 1.0f64);
        let dir0 = (1.0f64, 0.0f64);
        let dir1 = ((0.2f64).cos(), (0.2f64).sin());
        let samples: Vec<(f64, f64)> = (0..=40)
            .map(|i| {
                let t = i as f64 * 0.05;
                let (x, y) = if t <= 1.0 {
                    (start.0 + t * dir0.0, start.1 + t * dir0.1)
                } else {
                    (start.0 + dir0.0 + (t - 1.0) * dir1.0, start.1 + (t - 1.0) * dir1.1)
                };
                (t, (x * x + y * y).sqrt())
            })
            .collect();
        let d = develop_curve(0.0, &samples, 1e-9).unwrap();
        assert!(!d.convex);
        assert_relative_eq!(d.min_turn(), -0.2, epsilon = 1e-9);
    }

    #[test]
    fn lipschitz_violation_rejected() {
        assert!(develop_curve(0.0, &[(0.0, 1.0), (0.1, 1.5)], 1e-9).is_err());
    }

    #[test]
    fn exact_second_difference_for_model_functions() {
        // cos satisfies f'' = -f exactly
        let d = 0.3;
        let e = second_difference_excess(1.0, 0.0, d, (0.2f64 - d).cos(), 0.2f64.cos(), (0.2 + d).cos());
        assert!(e.abs() < 1e-13);
        let e = second_difference_excess(0.0, 2.0, d, (1.0 - d) * (1.0 - d), 1.0, (1.0 + d) * (1.0 + d));
        assert!(e.abs() < 1e-13);
    }

    fn side_range(kappa: f64) -> core::ops::Range<f64> {
        if kappa > 0.0 {
            0.01..3.1
        } else {
            0.01..5.0
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn round_trip(k in prop::sample::select(alloc::vec![-1.0, 0.0, 1.0]),
                      a in 0.01f64..3.1, c in 0.01f64..3.1, beta in 0.0f64..PI) {
            prop_assume!(side_range(k).contains(&a) && side_range(k).contains(&c));
            let b = model_side(k, a, c, beta).unwrap();
            let back = comparison_angle(k, a, b, c).unwrap();
            prop_assert!((back - beta).abs() < 1e-9, "beta={} back={}", beta, back);
        }

        #[test]
        fn angle_monotone_in_opposite_side(k in prop::sample::select(alloc::vec![-1.0, 0.0, 1.0]),
                                           a in 0.05f64..1.5, c in 0.05f64..1.5,
                                           u in 0.0f64..1.0, v in 0.0f64..1.0) {
            let lo = (a - c).abs();
            let hi = a + c;
            let (b1, b2) = if u < v { (lo + u * (hi - lo), lo + v * (hi - lo)) } else { (lo + v * (hi - lo), lo + u * (hi - lo)) };
            let g1 = comparison_angle(k, a, b1, c).unwrap();
            let g2 = comparison_angle(k, a, b2, c).unwrap();
            prop_assert!(g1 <= g2 + 1e-12);
        }

        #[test]
        fn rho_sigma_derivative(k in -2.0f64..2.0, x in 0.0f64..1.0) {
            let h = 1e-5;
            let d = (rho(k, x + h) - rho(k, x - h)) / (2.0 * h);
            prop_assert!((d - sigma(k, x)).abs() < 1e-8);
        }
    }
}
