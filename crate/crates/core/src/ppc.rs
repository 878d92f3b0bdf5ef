//! Planar kinematics of a single polynomial-curvature segment.
//!
//! A segment of length `L` is parameterised by a normalised arc coordinate
//! `s ∈ [0, 1]` and a modal coefficient vector `Θ = [θ₀, …, θ_m]`. The
//! local curvature is the polynomial `q(s) = Σ θ_k s^k`, the in-plane
//! tangent angle is its integral `α(s) = Σ θ_k s^(k+1)/(k+1)`, and the
//! bending-plane Cartesian coordinates are
//!
//! ```text
//! x(s) = L ∫₀ˢ cos α(v) dv,    y(s) = L ∫₀ˢ sin α(v) dv.
//! ```
//!
//! Orders 0 and 1 have closed forms (a circular arc and an Euler spiral);
//! higher orders are integrated adaptively.

use thiserror::Error;

use crate::quadrature::{self, QuadratureError};
use crate::special::fresnel;

/// Below this value of |θ₀·s| the circular-arc form switches to its Taylor
/// series to avoid 0/0.
const ARC_SERIES_THRESHOLD: f64 = 1e-4;

/// Below |θ₁| = threshold · max(1, |θ₀|) the Euler-spiral form is
/// numerically degenerate and the position falls back to quadrature.
const SPIRAL_DEGENERACY_THRESHOLD: f64 = 1e-6;

/// Tight tolerance used for internal closed-form fallbacks.
const FALLBACK_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PpcError {
    #[error("modal coefficient vector must not be empty")]
    EmptyCoeffs,
    #[error("modal coefficient {index} is not finite")]
    NonFiniteCoeff { index: usize },
    #[error("arc coordinate {value} outside [0, 1]")]
    ArcOutOfRange { value: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Normalised arc coordinate along a segment, guaranteed in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ArcCoordinate(f64);

impl ArcCoordinate {
    pub const START: ArcCoordinate = ArcCoordinate(0.0);
    pub const END: ArcCoordinate = ArcCoordinate(1.0);

    pub fn new(s: f64) -> Result<Self, PpcError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(PpcError::ArcOutOfRange { value: s });
        }
        Ok(ArcCoordinate(s))
    }

    /// Clamps into [0, 1]; NaN maps to 0.
    pub fn clamped(s: f64) -> Self {
        if s.is_nan() {
            ArcCoordinate(0.0)
        } else {
            ArcCoordinate(s.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Truncated curvature coefficient vector of one segment at one instant.
/// The approximation order is `len − 1`; order 0 is the constant-curvature
/// model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalConfig {
    coeffs: Vec<f64>,
}

impl ModalConfig {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, PpcError> {
        if coeffs.is_empty() {
            return Err(PpcError::EmptyCoeffs);
        }
        if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(PpcError::NonFiniteCoeff { index });
        }
        Ok(ModalConfig { coeffs })
    }

    /// All-zero configuration (a straight segment) of the given order.
    pub fn straight(order: usize) -> Self {
        ModalConfig {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Local curvature q(s) = Σ θ_k s^k, evaluated by Horner's rule.
    pub fn curvature_at(&self, s: ArcCoordinate) -> f64 {
        let s = s.value();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// In-plane tangent angle α(s) = Σ θ_k s^(k+1)/(k+1).
    pub fn orientation_at(&self, s: ArcCoordinate) -> f64 {
        self.orientation_raw(s.value())
    }

    /// α at an unchecked coordinate; used by integrators that evaluate at
    /// interior quadrature nodes.
    pub(crate) fn orientation_raw(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * s + c / (k as f64 + 1.0);
        }
        acc * s
    }
}

/// A point in the bending plane, in meters. `x` is the coordinate along
/// the undeformed tangent, `y` is the in-plane deflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const ORIGIN: PlanarPoint = PlanarPoint { x: 0.0, y: 0.0 };

    pub fn distance(self, other: PlanarPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Constant-curvature (circular-arc) position.
pub fn position_order0(theta0: f64, s: ArcCoordinate, length: f64) -> PlanarPoint {
    debug_assert!(length > 0.0);
    let s = s.value();
    let u = theta0 * s;
    if u.abs() < ARC_SERIES_THRESHOLD {
        // sin(u)/u and (1−cos u)/u expanded to O(u⁶); the truncation error
        // is below 1e-25 at the threshold.
        let u2 = u * u;
        let x = s * length * (1.0 - u2 / 6.0 * (1.0 - u2 / 20.0));
        let y = s * length * (u / 2.0) * (1.0 - u2 / 12.0 * (1.0 - u2 / 30.0));
        PlanarPoint { x, y }
    } else {
        let r = length / theta0;
        let half_sin = (0.5 * u).sin();
        PlanarPoint {
            x: r * u.sin(),
            // 1 − cos u written cancellation-free.
            y: r * 2.0 * half_sin * half_sin,
        }
    }
}

/// Linear-curvature (Euler-spiral) position through Fresnel integrals.
///
/// For θ₁ < 0 the coordinates follow from the reflection symmetry
/// (θ₀, θ₁) → (−θ₀, −θ₁), which preserves x and negates y. Near θ₁ = 0
/// the closed form degenerates to 0/0 and the value is taken from
/// quadrature instead.
pub fn position_order1(theta0: f64, theta1: f64, s: ArcCoordinate, length: f64) -> PlanarPoint {
    debug_assert!(length > 0.0);
    if theta1.abs() < SPIRAL_DEGENERACY_THRESHOLD * theta0.abs().max(1.0) {
        let theta = ModalConfig::new(vec![theta0, theta1]).expect("finite coefficients");
        return match position_quadrature(&theta, s, length, FALLBACK_TOL) {
            Ok(p) => p,
            // Unreachable for sane inputs; an enormous θ₀ with a relatively
            // negligible θ₁ degrades to the circular arc.
            Err(_) => position_order0(theta0, s, length),
        };
    }

    let reflect = theta1 < 0.0;
    let (t0, t1) = if reflect {
        (-theta0, -theta1)
    } else {
        (theta0, theta1)
    };

    let s = s.value();
    let sqrt_pi_t1 = (std::f64::consts::PI * t1).sqrt();
    let a = (t0 + t1 * s) / sqrt_pi_t1;
    let b = t0 / sqrt_pi_t1;
    let phase = t0 * t0 / (2.0 * t1);
    let (c, d) = phase.sin_cos();
    let (ca, sa) = fresnel(a);
    let (cb, sb) = fresnel(b);
    let scale = length * (std::f64::consts::PI / t1).sqrt();
    let x = scale * (d * (ca - cb) + c * (sa - sb));
    let y = scale * (d * (sa - sb) - c * (ca - cb));
    PlanarPoint {
        x,
        y: if reflect { -y } else { y },
    }
}

/// Position for any order by adaptive quadrature of (cos α, sin α), with
/// absolute error at most `tol · length`.
pub fn position_quadrature(
    theta: &ModalConfig,
    s: ArcCoordinate,
    length: f64,
    tol: f64,
) -> Result<PlanarPoint, PpcError> {
    debug_assert!(length > 0.0 && tol > 0.0);
    let (x, y) =
        quadrature::integrate_direction(|v| theta.orientation_raw(v), 0.0, s.value(), tol)?;
    Ok(PlanarPoint {
        x: length * x,
        y: length * y,
    })
}

/// Position by the best available method for the order: closed forms for
/// orders 0 and 1, adaptive quadrature at the default tolerance otherwise.
pub fn position(theta: &ModalConfig, s: ArcCoordinate, length: f64) -> Result<PlanarPoint, PpcError> {
    match theta.coeffs() {
        [t0] => Ok(position_order0(*t0, s, length)),
        [t0, t1] => Ok(position_order1(*t0, *t1, s, length)),
        _ => position_quadrature(theta, s, length, quadrature::DEFAULT_TOL),
    }
}

/// Positions on an ascending grid of arc coordinates, integrating each
/// interval once. Orders 0 and 1 use the closed forms per point.
pub fn positions_on_grid(
    theta: &ModalConfig,
    length: f64,
    grid: &[ArcCoordinate],
) -> Result<Vec<PlanarPoint>, PpcError> {
    if theta.order() <= 1 {
        return grid
            .iter()
            .map(|&s| position(theta, s, length))
            .collect();
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut prev_s = 0.0;
    let mut acc = (0.0, 0.0);
    for &s in grid {
        let s = s.value();
        debug_assert!(s >= prev_s, "grid must be ascending");
        let step = quadrature::integrate_direction(
            |v| theta.orientation_raw(v),
            prev_s,
            s,
            quadrature::DEFAULT_TOL * (s - prev_s).max(1e-3),
        )?;
        acc.0 += step.0;
        acc.1 += step.1;
        prev_s = s;
        out.push(PlanarPoint {
            x: length * acc.0,
            y: length * acc.1,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn arc(s: f64) -> ArcCoordinate {
        ArcCoordinate::new(s).unwrap()
    }

    #[test]
    fn arc_coordinate_rejects_out_of_range() {
        assert!(ArcCoordinate::new(-0.1).is_err());
        assert!(ArcCoordinate::new(1.1).is_err());
        assert!(ArcCoordinate::new(f64::NAN).is_err());
        assert_eq!(ArcCoordinate::clamped(2.0).value(), 1.0);
    }

    #[test]
    fn modal_config_invariants() {
        assert!(ModalConfig::new(vec![]).is_err());
        assert!(matches!(
            ModalConfig::new(vec![1.0, f64::INFINITY]),
            Err(PpcError::NonFiniteCoeff { index: 1 })
        ));
        assert_eq!(ModalConfig::straight(2).order(), 2);
    }

    #[test]
    fn curvature_examples() {
        let straight = ModalConfig::new(vec![0.0]).unwrap();
        assert_eq!(straight.curvature_at(arc(0.7)), 0.0);

        let theta = ModalConfig::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(theta.curvature_at(arc(0.5)), 2.0);

        // Order zero is the constant-curvature model.
        let constant = ModalConfig::new(vec![0.42]).unwrap();
        for s in [0.0, 0.3, 1.0] {
            assert_eq!(constant.curvature_at(arc(s)), 0.42);
        }
    }

    #[test]
    fn orientation_examples() {
        let zero = ModalConfig::straight(3);
        assert_eq!(zero.orientation_at(arc(0.9)), 0.0);

        let theta = ModalConfig::new(vec![1.0, 2.0]).unwrap();
        assert!((theta.orientation_at(arc(0.5)) - 0.75).abs() < 1e-15);
        assert!((theta.orientation_at(arc(1.0)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn position_order0_examples() {
        let p = position_order0(0.0, arc(1.0), 1.0);
        assert!((p.x - 1.0).abs() < 1e-15);
        assert!(p.y.abs() < 1e-15);

        // Quarter circle of radius 2/π.
        let p = position_order0(PI / 2.0, arc(1.0), 1.0);
        assert!((p.x - 2.0 / PI).abs() < 1e-15);
        assert!((p.y - 2.0 / PI).abs() < 1e-15);

        // Semicircle endpoint.
        let p = position_order0(PI, arc(1.0), 1.0);
        assert!(p.x.abs() < 1e-15);
        assert!((p.y - 2.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn position_order0_series_branch_is_continuous() {
        // Straddle the series threshold and compare with quadrature.
        for &t0 in &[9.9e-5, 1.01e-4, -9.9e-5, -1.01e-4] {
            let theta = ModalConfig::new(vec![t0]).unwrap();
            let exact = position_quadrature(&theta, arc(1.0), 1.0, 1e-14).unwrap();
            let p = position_order0(t0, arc(1.0), 1.0);
            assert!(p.distance(exact) < 1e-13, "t0={t0}");
        }
    }

    #[test]
    fn position_order1_matches_quadrature() {
        let cases = [
            (0.5, 1.0, 1.0),
            (0.5, -1.0, 1.0),
            (-2.0, 3.0, 0.7),
            (3.0, -6.0, 1.0),
            (0.0, 2.0, 1.0),
            (1.0, 1e-5, 1.0),
            (1.0, 1e-8, 1.0), // degenerate branch
        ];
        for (t0, t1, s) in cases {
            let theta = ModalConfig::new(vec![t0, t1]).unwrap();
            let exact = position_quadrature(&theta, arc(s), 1.0, 1e-12).unwrap();
            let p = position_order1(t0, t1, arc(s), 1.0);
            assert!(
                p.distance(exact) < 1e-10,
                "t0={t0} t1={t1} s={s}: {p:?} vs {exact:?}"
            );
        }
    }

    #[test]
    fn position_order1_reflection_symmetry() {
        let plus = position_order1(-0.5, 1.0, arc(1.0), 1.0);
        let minus = position_order1(0.5, -1.0, arc(1.0), 1.0);
        assert!((plus.x - minus.x).abs() < 1e-14);
        assert!((plus.y + minus.y).abs() < 1e-14);
    }

    #[test]
    fn quadrature_straight_segment() {
        let theta = ModalConfig::straight(2);
        let p = position_quadrature(&theta, arc(0.7), 2.0, 1e-12).unwrap();
        assert!((p.x - 1.4).abs() < 1e-12);
        assert!(p.y.abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_independent_high_resolution_rule() {
        // Fixed-order composite midpoint-free oracle: 10x-resolution
        // composite Simpson over a uniform mesh, independent of the
        // adaptive Gauss path.
        let theta = ModalConfig::new(vec![0.5, 1.0, -0.3]).unwrap();
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut ox = 0.0;
        let mut oy = 0.0;
        for i in 0..n {
            let a = i as f64 * h;
            let m = a + 0.5 * h;
            let b = a + h;
            let f = |v: f64| {
                let alpha = theta.orientation_raw(v);
                (alpha.cos(), alpha.sin())
            };
            let (ca, sa) = f(a);
            let (cm, sm) = f(m);
            let (cb, sb) = f(b);
            ox += h / 6.0 * (ca + 4.0 * cm + cb);
            oy += h / 6.0 * (sa + 4.0 * sm + sb);
        }
        let p = position_quadrature(&theta, arc(1.0), 1.0, 1e-12).unwrap();
        assert!((p.x - ox).abs() < 1e-11, "{} vs {}", p.x, ox);
        assert!((p.y - oy).abs() < 1e-11, "{} vs {}", p.y, oy);
    }

    #[test]
    fn grid_positions_match_pointwise() {
        let theta = ModalConfig::new(vec![0.8, -1.2, 0.5]).unwrap();
        let grid: Vec<ArcCoordinate> = (0..=10).map(|k| arc(k as f64 / 10.0)).collect();
        let pts = positions_on_grid(&theta, 0.48, &grid).unwrap();
        for (i, &s) in grid.iter().enumerate() {
            let reference = position_quadrature(&theta, s, 0.48, 1e-13).unwrap();
            assert!(pts[i].distance(reference) < 1e-11);
        }
    }

    #[test]
    fn arc_length_bound() {
        let theta = ModalConfig::new(vec![2.0, -3.0, 1.5, 0.7]).unwrap();
        for k in 1..=10 {
            let s = arc(k as f64 / 10.0);
            let p = position_quadrature(&theta, s, 0.48, 1e-12).unwrap();
            let reach = p.x.hypot(p.y);
            assert!(reach <= s.value() * 0.48 + 1e-12);
        }
    }
}
