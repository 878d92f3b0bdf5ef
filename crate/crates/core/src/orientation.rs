//! Mapping between quaternions and the continuum bend configuration (α, φ).
//!
//! Under the no-twist hypothesis the orientation at a backbone location is
//! a rotation by the in-plane angle α about the bending-plane normal
//! n = [−sin φ, cos φ, 0], which gives the quaternion
//!
//! ```text
//! q = [cos(α/2), −sin φ · sin(α/2), cos φ · sin(α/2), 0].
//! ```
//!
//! Extraction inverts this with a two-argument arctangent, so the full
//! φ ∈ [0, 2π) range is recovered, and reports |z| as a twist residual.

use thiserror::Error;

use crate::quat::Quaternion;

/// Bends shallower than this leave the bending direction undefined (0.5°).
pub const DEFAULT_ALPHA_MIN: f64 = 0.5 * std::f64::consts::PI / 180.0;

/// Twist residual |z| above this value flags a no-twist violation.
pub const DEFAULT_TWIST_TOL: f64 = 0.02;

/// Tolerance on the unit-norm invariant of measured quaternions.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrientationError {
    #[error("quaternion is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
}

/// Bend configuration at one location: in-plane angle α ∈ [0, π] and
/// bending direction φ ∈ [0, 2π). `phi_defined` is false near the straight
/// configuration, where the direction is singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendConfig {
    pub alpha: f64,
    pub phi: f64,
    pub phi_defined: bool,
}

/// Extraction result: the configuration plus the no-twist violation
/// measure |z|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendExtraction {
    pub config: BendConfig,
    pub twist_residual: f64,
}

/// Recovers (α, φ) from a unit quaternion. `alpha_min` sets the bend below
/// which φ is reported undefined.
pub fn extract_config(q: &Quaternion, alpha_min: f64) -> Result<BendExtraction, OrientationError> {
    let norm = q.norm();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(OrientationError::NotNormalized { norm });
    }
    let q = q.canonicalized();
    let alpha = 2.0 * q.w.clamp(-1.0, 1.0).acos();
    let twist_residual = q.z.abs();
    let sin_half = (1.0 - q.w * q.w).max(0.0).sqrt();
    let phi_defined = sin_half >= (alpha_min / 2.0).sin();
    let phi = if q.x == 0.0 && q.y == 0.0 {
        0.0
    } else {
        wrap_two_pi((-q.x).atan2(q.y))
    };
    Ok(BendExtraction {
        config: BendConfig {
            alpha,
            phi,
            phi_defined,
        },
        twist_residual,
    })
}

/// Quaternion of a bend of angle `alpha` in direction `phi`; the z
/// component is exactly zero. Valid for any real `alpha` (it is the
/// rotation by `alpha` about the plane normal), though only α ∈ [0, π]
/// round-trips through `extract_config` unchanged.
pub fn config_to_quaternion(alpha: f64, phi: f64) -> Quaternion {
    let (sin_half, cos_half) = (alpha / 2.0).sin_cos();
    let (sin_phi, cos_phi) = phi.sin_cos();
    Quaternion::new(cos_half, -sin_phi * sin_half, cos_phi * sin_half, 0.0)
}

/// Wraps an angle into [0, 2π).
pub fn wrap_two_pi(angle: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut a = angle % tau;
    if a < 0.0 {
        a += tau;
    }
    if a >= tau {
        a = 0.0;
    }
    a
}

/// Smallest absolute difference between two angles, in [0, π].
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_two_pi(a - b);
    d.min(std::f64::consts::TAU - d)
}
