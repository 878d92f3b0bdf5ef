//! First-order propagation of orientation-sensor noise to bending-plane
//! position.
//!
//! The noisy coordinate is the quaternion scalar w at each sensor. The
//! chain w → α → Θ → (x, y) is differentiated analytically:
//!
//! ```text
//! dα/dw = −2 / √(1 − w²)
//! J_w^m = A⁻¹ · diag(dα/dw)
//! J_m^p[·][k] = L ∫₀ˢ (−sin, cos)(α(v)) · v^(k+1)/(k+1) dv
//! Σ_position = J Σ_w Jᵀ,  J = J_m^p · J_w^m
//! ```
//!
//! The linearization is validated against Monte Carlo in the test suites.

use nalgebra::{DMatrix, Matrix2};
use thiserror::Error;

use crate::modal::{build_system, ModalError, SensorPlacement};
use crate::ppc::{ArcCoordinate, ModalConfig};
use crate::quadrature::{self, QuadratureError};

/// |w| closer to 1 than this makes dα/dw unbounded (α → 0).
const W_SINGULARITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UncertaintyError {
    #[error("sensor {index} has |w| = {w} within 1e-9 of 1; dα/dw is unbounded near zero bend")]
    SingularOrientation { index: usize, w: f64 },
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("noise standard deviations must be non-negative and finite: {0:?}")]
    InvalidNoise(Vec<f64>),
    #[error("confidence must lie in (0, 1), got {0}")]
    BadConfidence(f64),
    #[error("covariance is not symmetric positive semi-definite")]
    NotPositiveSemiDefinite,
    #[error(transparent)]
    Modal(#[from] ModalError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Per-sensor standard deviations of the quaternion scalar component.
#[derive(Debug, Clone, PartialEq)]
pub struct QuatNoise {
    sigmas: Vec<f64>,
}

impl QuatNoise {
    pub fn new(sigmas: Vec<f64>) -> Result<Self, UncertaintyError> {
        if sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(UncertaintyError::InvalidNoise(sigmas));
        }
        Ok(QuatNoise { sigmas })
    }

    pub fn uniform(sigma: f64, sensors: usize) -> Result<Self, UncertaintyError> {
        QuatNoise::new(vec![sigma; sensors])
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }
}

/// 2×2 symmetric positive semi-definite position covariance, in m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarCovariance {
    matrix: Matrix2<f64>,
}

impl PlanarCovariance {
    pub fn new(matrix: Matrix2<f64>) -> Result<Self, UncertaintyError> {
        let scale = matrix.amax().max(1.0);
        if (matrix[(0, 1)] - matrix[(1, 0)]).abs() > 1e-12 * scale {
            return Err(UncertaintyError::NotPositiveSemiDefinite);
        }
        let symmetric = Matrix2::new(
            matrix[(0, 0)],
            0.5 * (matrix[(0, 1)] + matrix[(1, 0)]),
            0.5 * (matrix[(0, 1)] + matrix[(1, 0)]),
            matrix[(1, 1)],
        );
        let (lo, _) = eigenvalues_2x2(&symmetric);
        if lo < -1e-12 * scale {
            return Err(UncertaintyError::NotPositiveSemiDefinite);
        }
        Ok(PlanarCovariance { matrix: symmetric })
    }

    pub fn zero() -> Self {
        PlanarCovariance {
            matrix: Matrix2::zeros(),
        }
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }
}

fn eigenvalues_2x2(m: &Matrix2<f64>) -> (f64, f64) {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    (tr / 2.0 - disc, tr / 2.0 + disc)
}

/// Jacobian of the modal coefficients w.r.t. the sensor w values:
/// A⁻¹ · diag(−2/√(1−w²)). Square placements only.
pub fn jacobian_w_to_modal(
    placement: &SensorPlacement,
    w_values: &[f64],
) -> Result<DMatrix<f64>, UncertaintyError> {
    let n = placement.len();
    if w_values.len() != n {
        return Err(UncertaintyError::DimensionMismatch {
            expected: n,
            got: w_values.len(),
        });
    }
    for (index, &w) in w_values.iter().enumerate() {
        if 1.0 - w.abs() < W_SINGULARITY_TOL {
            return Err(UncertaintyError::SingularOrientation { index, w });
        }
    }
    let a = build_system(placement, placement.square_order());
    let inv = a
        .lu()
        .try_inverse()
        .ok_or(ModalError::SingularSystem)?;
    let scale = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -2.0 / (1.0 - w_values[i] * w_values[i]).sqrt()
        } else {
            0.0
        }
    });
    Ok(inv * scale)
}

/// Jacobian of the planar position w.r.t. the modal coefficients, by
/// differentiation under the integral sign (rows: x, y).
pub fn jacobian_modal_to_position(
    theta: &ModalConfig,
    s: ArcCoordinate,
    length: f64,
) -> Result<DMatrix<f64>, UncertaintyError> {
    let cols = theta.order() + 1;
    let mut j = DMatrix::zeros(2, cols);
    for k in 0..cols {
        let kf = k as f64;
        let dx = quadrature::integrate(
            |v| -theta.orientation_raw(v).sin() * v.powi(k as i32 + 1) / (kf + 1.0),
            0.0,
            s.value(),
            quadrature::DEFAULT_TOL,
        )?;
        let dy = quadrature::integrate(
            |v| theta.orientation_raw(v).cos() * v.powi(k as i32 + 1) / (kf + 1.0),
            0.0,
            s.value(),
            quadrature::DEFAULT_TOL,
        )?;
        j[(0, k)] = length * dx;
        j[(1, k)] = length * dy;
    }
    Ok(j)
}

/// Position covariance Σ = J Σ_w Jᵀ with J = J_m^p · J_w^m and
/// Σ_w = diag(σ_w²).
pub fn position_covariance(
    placement: &SensorPlacement,
    w_values: &[f64],
    theta: &ModalConfig,
    s: ArcCoordinate,
    length: f64,
    noise: &QuatNoise,
) -> Result<PlanarCovariance, UncertaintyError> {
    let n = placement.len();
    if noise.sigmas().len() != n {
        return Err(UncertaintyError::DimensionMismatch {
            expected: n,
            got: noise.sigmas().len(),
        });
    }
    if theta.order() + 1 != n {
        return Err(UncertaintyError::DimensionMismatch {
            expected: n,
            got: theta.order() + 1,
        });
    }
    let j_wm = jacobian_w_to_modal(placement, w_values)?;
    let j_mp = jacobian_modal_to_position(theta, s, length)?;
    let j = j_mp * j_wm;
    let sigma_w = DMatrix::from_fn(n, n, |i, k| {
        if i == k {
            noise.sigmas()[i] * noise.sigmas()[i]
        } else {
            0.0
        }
    });
    let full = &j * sigma_w * j.transpose();
    let m = Matrix2::new(full[(0, 0)], full[(0, 1)], full[(1, 0)], full[(1, 1)]);
    PlanarCovariance::new(m)
}

/// Confidence ellipse of a planar covariance. Semi-axes are ordered major
/// then minor; `angle` is the major-axis direction in [0, π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub semi_axes: [f64; 2],
    pub angle: f64,
}

/// Scales the covariance eigen-decomposition by the chi-square quantile for
/// two degrees of freedom: q = −2 ln(1 − confidence).
pub fn uncertainty_ellipse(
    cov: &PlanarCovariance,
    confidence: f64,
) -> Result<Ellipse, UncertaintyError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(UncertaintyError::BadConfidence(confidence));
    }
    let q = -2.0 * (1.0 - confidence).ln();
    let m = cov.matrix();
    let (lo, hi) = eigenvalues_2x2(m);
    let lo = lo.max(0.0);

    // Eigenvector of the larger eigenvalue; fall back to the axes for a
    // diagonal matrix.
    let angle = if m[(0, 1)].abs() <= 1e-300 {
        if m[(0, 0)] >= m[(1, 1)] {
            0.0
        } else {
            std::f64::consts::FRAC_PI_2
        }
    } else {
        let vx = m[(0, 1)];
        let vy = hi - m[(0, 0)];
        let mut a = vy.atan2(vx);
        if a < 0.0 {
            a += std::f64::consts::PI;
        }
        if a >= std::f64::consts::PI {
            a -= std::f64::consts::PI;
        }
        a
    };
    Ok(Ellipse {
        semi_axes: [(q * hi).sqrt(), (q * lo).sqrt()],
        angle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn placement(locs: &[f64]) -> SensorPlacement {
        SensorPlacement::new(locs.to_vec()).unwrap()
    }

    fn arc(s: f64) -> ArcCoordinate {
        ArcCoordinate::new(s).unwrap()
    }

    #[test]
    fn single_sensor_jacobian_at_half_turn() {
        // w = 0 means α = π; dα/dw there is −2 and A = [1].
        let j = jacobian_w_to_modal(&placement(&[1.0]), &[0.0]).unwrap();
        assert!((j[(0, 0)] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn w_near_unity_is_singular() {
        let res = jacobian_w_to_modal(&placement(&[0.5, 1.0]), &[0.9, 1.0 - 1e-12]);
        assert!(matches!(
            res,
            Err(UncertaintyError::SingularOrientation { index: 1, .. })
        ));
    }

    #[test]
    fn w_jacobian_matches_finite_differences() {
        let p = placement(&[0.4, 0.75, 1.0]);
        let w = [0.8, 0.55, 0.2];
        let j = jacobian_w_to_modal(&p, &w).unwrap();

        let solve_from_w = |w: &[f64]| {
            let alphas: Vec<f64> = w.iter().map(|v| 2.0 * v.acos()).collect();
            crate::modal::solve_modal(&p, &alphas).unwrap()
        };
        let h = 1e-7;
        for col in 0..3 {
            let mut wp = w;
            let mut wm = w;
            wp[col] += h;
            wm[col] -= h;
            let tp = solve_from_w(&wp);
            let tm = solve_from_w(&wm);
            for row in 0..3 {
                let fd = (tp.coeffs()[row] - tm.coeffs()[row]) / (2.0 * h);
                let rel = (j[(row, col)] - fd).abs() / fd.abs().max(1e-9);
                assert!(rel < 1e-5, "row {row} col {col}: {} vs {fd}", j[(row, col)]);
            }
        }
    }

    #[test]
    fn straight_position_jacobian_is_analytic() {
        let theta = ModalConfig::straight(2);
        let j = jacobian_modal_to_position(&theta, arc(1.0), 1.0).unwrap();
        for k in 0..3 {
            let kf = k as f64;
            assert!(j[(0, k)].abs() < 1e-12);
            let expected = 1.0 / ((kf + 1.0) * (kf + 2.0));
            assert!((j[(1, k)] - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn position_jacobian_at_base_is_zero() {
        let theta = ModalConfig::new(vec![1.0, 0.5]).unwrap();
        let j = jacobian_modal_to_position(&theta, arc(0.0), 0.48).unwrap();
        assert_eq!(j.amax(), 0.0);
    }

    #[test]
    fn position_jacobian_matches_finite_differences() {
        let theta = ModalConfig::new(vec![1.1, -0.6, 0.4]).unwrap();
        let s = arc(0.8);
        let length = 0.48;
        let j = jacobian_modal_to_position(&theta, s, length).unwrap();
        let h = 1e-6;
        for k in 0..3 {
            let mut up = theta.coeffs().to_vec();
            let mut dn = theta.coeffs().to_vec();
            up[k] += h;
            dn[k] -= h;
            let pu = crate::ppc::position_quadrature(
                &ModalConfig::new(up).unwrap(),
                s,
                length,
                1e-12,
            )
            .unwrap();
            let pd = crate::ppc::position_quadrature(
                &ModalConfig::new(dn).unwrap(),
                s,
                length,
                1e-12,
            )
            .unwrap();
            let fdx = (pu.x - pd.x) / (2.0 * h);
            let fdy = (pu.y - pd.y) / (2.0 * h);
            assert!((j[(0, k)] - fdx).abs() / fdx.abs().max(1e-9) < 1e-5);
            assert!((j[(1, k)] - fdy).abs() / fdy.abs().max(1e-9) < 1e-5);
        }
    }

    #[test]
    fn zero_noise_gives_zero_covariance() {
        let p = placement(&[0.5, 1.0]);
        let theta = ModalConfig::new(vec![1.0, 2.0]).unwrap();
        let w: Vec<f64> = p
            .locations()
            .iter()
            .map(|&s| (theta.orientation_at(arc(s)) / 2.0).cos())
            .collect();
        let noise = QuatNoise::uniform(0.0, 2).unwrap();
        let cov = position_covariance(&p, &w, &theta, arc(1.0), 0.48, &noise).unwrap();
        assert_eq!(cov.entry(0, 0), 0.0);
        assert_eq!(cov.entry(1, 1), 0.0);
    }

    #[test]
    fn covariance_is_bilinear_in_noise() {
        let p = placement(&[0.5, 1.0]);
        let theta = ModalConfig::new(vec![1.0, 2.0]).unwrap();
        let w: Vec<f64> = p
            .locations()
            .iter()
            .map(|&s| (theta.orientation_at(arc(s)) / 2.0).cos())
            .collect();
        let base = position_covariance(
            &p,
            &w,
            &theta,
            arc(1.0),
            0.48,
            &QuatNoise::uniform(1e-3, 2).unwrap(),
        )
        .unwrap();
        let doubled = position_covariance(
            &p,
            &w,
            &theta,
            arc(1.0),
            0.48,
            &QuatNoise::uniform(2e-3, 2).unwrap(),
        )
        .unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((doubled.entry(i, j) - 4.0 * base.entry(i, j)).abs() < 1e-18);
            }
        }
    }

    #[test]
    fn ellipse_of_isotropic_covariance_is_a_circle() {
        let sigma = 2.5e-3;
        let cov =
            PlanarCovariance::new(Matrix2::new(sigma * sigma, 0.0, 0.0, sigma * sigma)).unwrap();
        // Confidence for which the chi-square quantile is exactly 1.
        let confidence = 1.0 - (-0.5f64).exp();
        let e = uncertainty_ellipse(&cov, confidence).unwrap();
        assert!((e.semi_axes[0] - sigma).abs() < 1e-12);
        assert!((e.semi_axes[1] - sigma).abs() < 1e-12);
    }

    #[test]
    fn diagonal_covariance_axes() {
        let cov = PlanarCovariance::new(Matrix2::new(4.0, 0.0, 0.0, 1.0)).unwrap();
        let e = uncertainty_ellipse(&cov, 0.5).unwrap();
        assert!((e.semi_axes[0] / e.semi_axes[1] - 2.0).abs() < 1e-12);
        assert_eq!(e.angle, 0.0);
    }

    #[test]
    fn rotated_covariance_recovers_angle() {
        let angle: f64 = 0.7;
        let (s, c) = angle.sin_cos();
        // R diag(4, 1) Rᵀ
        let m = Matrix2::new(
            4.0 * c * c + s * s,
            3.0 * s * c,
            3.0 * s * c,
            4.0 * s * s + c * c,
        );
        let cov = PlanarCovariance::new(m).unwrap();
        let e = uncertainty_ellipse(&cov, 0.9).unwrap();
        assert!((e.angle - angle).abs() < 1e-12);
        assert!((e.semi_axes[0] / e.semi_axes[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_covariance_degenerates_gracefully() {
        let e = uncertainty_ellipse(&PlanarCovariance::zero(), 0.95).unwrap();
        assert_eq!(e.semi_axes, [0.0, 0.0]);
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        assert!(PlanarCovariance::new(Matrix2::new(1.0, 0.5, -0.5, 1.0)).is_err());
        assert!(PlanarCovariance::new(Matrix2::new(-1.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn bad_confidence_is_rejected() {
        let cov = PlanarCovariance::zero();
        assert!(uncertainty_ellipse(&cov, 0.0).is_err());
        assert!(uncertainty_ellipse(&cov, 1.0).is_err());
    }
}
