//! Unit quaternion algebra (Hamilton convention, scalar first).
//!
//! A quaternion here rotates body-frame vectors into the parent frame:
//! `v_parent = q · v_body · q⁻¹`. Since q and −q denote the same rotation,
//! the canonical representative has `w ≥ 0`.

use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Quaternion {
        let n = self.norm();
        debug_assert!(n > 0.0, "cannot normalize a zero quaternion");
        Quaternion::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    /// Representative with w ≥ 0. At w = 0 the sign is fixed by the first
    /// nonzero component of (z, y, x) so extraction stays deterministic.
    pub fn canonicalized(&self) -> Quaternion {
        let flip = if self.w != 0.0 {
            self.w < 0.0
        } else if self.z != 0.0 {
            self.z < 0.0
        } else if self.y != 0.0 {
            self.y < 0.0
        } else {
            self.x < 0.0
        };
        if flip {
            Quaternion::new(-self.w, -self.x, -self.y, -self.z)
        } else {
            *self
        }
    }

    pub fn conjugate(&self) -> Quaternion {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Rotates a vector: v' = q v q⁻¹.
    pub fn rotate(&self, v: Vec3) -> Vec3 {
        let u = [self.x, self.y, self.z];
        let t = vec3::scale(vec3::cross(u, v), 2.0);
        vec3::add(
            vec3::add(v, vec3::scale(t, self.w)),
            vec3::cross(u, t),
        )
    }

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Quaternion {
        let axis = vec3::normalize(axis).unwrap_or([0.0, 0.0, 1.0]);
        let (s, c) = (0.5 * angle).sin_cos();
        Quaternion::new(c, s * axis[0], s * axis[1], s * axis[2])
    }

    /// Exponential map of a rotation vector (angle · axis).
    pub fn from_rotation_vector(r: Vec3) -> Quaternion {
        let angle = vec3::norm(r);
        if angle < 1e-12 {
            // First-order expansion, renormalized.
            Quaternion::new(1.0, 0.5 * r[0], 0.5 * r[1], 0.5 * r[2]).normalized()
        } else {
            Quaternion::from_axis_angle(r, angle)
        }
    }

    /// Logarithm map back to a rotation vector, choosing the representative
    /// with angle in [0, π].
    pub fn to_rotation_vector(&self) -> Vec3 {
        let q = self.canonicalized();
        let sin_half = (q.x * q.x + q.y * q.y + q.z * q.z).sqrt();
        if sin_half < 1e-12 {
            return [2.0 * q.x, 2.0 * q.y, 2.0 * q.z];
        }
        let angle = 2.0 * sin_half.atan2(q.w);
        vec3::scale([q.x, q.y, q.z], angle / sin_half)
    }

    /// Rotation angle between two orientations, in [0, π]. Computed from
    /// the chord ‖q₁ ∓ q₂‖ = 2|sin(θ/4)|, which stays accurate for tiny
    /// angles where arccos of the dot product loses half the digits.
    pub fn angle_to(&self, other: &Quaternion) -> f64 {
        let sign = if self.dot(other) < 0.0 { -1.0 } else { 1.0 };
        let dw = self.w - sign * other.w;
        let dx = self.x - sign * other.x;
        let dy = self.y - sign * other.y;
        let dz = self.z - sign * other.z;
        let half_chord = 0.5 * (dw * dw + dx * dx + dy * dy + dz * dz).sqrt();
        4.0 * half_chord.clamp(0.0, 1.0).asin()
    }

    /// Integrates a body-frame angular rate over dt.
    pub fn integrate_body_rate(&self, omega: Vec3, dt: f64) -> Quaternion {
        (*self * Quaternion::from_rotation_vector(vec3::scale(omega, dt))).normalized()
    }

    /// Spherical linear interpolation along the shorter arc; slerp(q, q, u) = q.
    pub fn slerp(&self, other: &Quaternion, u: f64) -> Quaternion {
        let mut cos_angle = self.dot(other);
        let mut end = *other;
        if cos_angle < 0.0 {
            cos_angle = -cos_angle;
            end = Quaternion::new(-other.w, -other.x, -other.y, -other.z);
        }
        if cos_angle > 1.0 - 1e-12 {
            // Nearly parallel: linear blend is exact to machine precision.
            return Quaternion::new(
                self.w + u * (end.w - self.w),
                self.x + u * (end.x - self.x),
                self.y + u * (end.y - self.y),
                self.z + u * (end.z - self.z),
            )
            .normalized();
        }
        let angle = cos_angle.clamp(-1.0, 1.0).acos();
        let sin_angle = angle.sin();
        let ka = ((1.0 - u) * angle).sin() / sin_angle;
        let kb = (u * angle).sin() / sin_angle;
        Quaternion::new(
            ka * self.w + kb * end.w,
            ka * self.x + kb * end.x,
            ka * self.y + kb * end.y,
            ka * self.z + kb * end.z,
        )
        .normalized()
    }

    /// Rotation matrix column-wise into a quaternion (Shepperd's method).
    pub fn from_rotation_matrix(m: &[[f64; 3]; 3]) -> Quaternion {
        let trace = m[0][0] + m[1][1] + m[2][2];
        let q = if trace > 0.0 {
            let r = (1.0 + trace).sqrt();
            let s = 0.5 / r;
            Quaternion::new(
                0.5 * r,
                (m[2][1] - m[1][2]) * s,
                (m[0][2] - m[2][0]) * s,
                (m[1][0] - m[0][1]) * s,
            )
        } else if m[0][0] >= m[1][1] && m[0][0] >= m[2][2] {
            let r = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt();
            let s = 0.5 / r;
            Quaternion::new(
                (m[2][1] - m[1][2]) * s,
                0.5 * r,
                (m[0][1] + m[1][0]) * s,
                (m[0][2] + m[2][0]) * s,
            )
        } else if m[1][1] >= m[2][2] {
            let r = (1.0 - m[0][0] + m[1][1] - m[2][2]).sqrt();
            let s = 0.5 / r;
            Quaternion::new(
                (m[0][2] - m[2][0]) * s,
                (m[0][1] + m[1][0]) * s,
                0.5 * r,
                (m[1][2] + m[2][1]) * s,
            )
        } else {
            let r = (1.0 - m[0][0] - m[1][1] + m[2][2]).sqrt();
            let s = 0.5 / r;
            Quaternion::new(
                (m[1][0] - m[0][1]) * s,
                (m[0][2] + m[2][0]) * s,
                (m[1][2] + m[2][1]) * s,
                0.5 * r,
            )
        };
        q.normalized()
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;

    /// Hamilton product; (a * b) applies b first, then a.
    fn mul(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
        )
    }
}
