//! Complementary attitude filter for raw inertial streams.
//!
//! Gyro rates are integrated on the quaternion manifold and corrected by a
//! proportional-integral feedback term built from the accelerometer gravity
//! reference and, when present, the magnetometer heading reference. Without
//! a magnetometer the yaw axis is unobservable and only gravity-referenced
//! axes are drift-free.

use crate::quat::Quaternion;
use crate::vec3::{self, Vec3};

pub const STANDARD_GRAVITY: f64 = 9.80665;

/// World magnetic reference direction (unit, pointing to magnetic north).
pub const MAG_REFERENCE: Vec3 = [1.0, 0.0, 0.0];

/// Accelerometer corrections are skipped when the measured specific force
/// deviates from 1 g by more than this fraction (free fall, impacts).
const ACCEL_GATE: f64 = 0.3;

/// One inertial sample. Gyro in rad/s, accel in m/s², mag unit-normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    pub gyro: Vec3,
    pub accel: Vec3,
    pub mag: Option<Vec3>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterGains {
    /// Proportional feedback on the orientation error.
    pub kp: f64,
    /// Integral feedback, absorbs slow gyro bias.
    pub ki: f64,
}

impl Default for FilterGains {
    fn default() -> Self {
        FilterGains { kp: 1.0, ki: 0.01 }
    }
}

/// Attitude filter state for one sensor stream.
#[derive(Debug, Clone)]
pub struct AttitudeFilter {
    q: Quaternion,
    integral: Vec3,
    gains: FilterGains,
    initialized: bool,
}

impl AttitudeFilter {
    /// Starts uninitialized; the first sample with a plausible accelerometer
    /// reading bootstraps the orientation directly.
    pub fn new(gains: FilterGains) -> Self {
        AttitudeFilter {
            q: Quaternion::IDENTITY,
            integral: [0.0; 3],
            gains,
            initialized: false,
        }
    }

    /// Starts from a known orientation, skipping the bootstrap.
    pub fn with_initial(q: Quaternion, gains: FilterGains) -> Self {
        AttitudeFilter {
            q: q.normalized(),
            integral: [0.0; 3],
            gains,
            initialized: true,
        }
    }

    pub fn quaternion(&self) -> Quaternion {
        self.q
    }

    /// Advances the state by one sample and returns the new orientation
    /// estimate. A sample's gyro reading is taken as the mean body rate
    /// over the `dt` seconds ending at its timestamp: the state is first
    /// propagated to the sample time, then corrected against the reference
    /// directions measured at that same instant.
    pub fn update(&mut self, sample: &ImuSample, dt: f64) -> Quaternion {
        debug_assert!(dt > 0.0);
        if !self.initialized {
            if let Some(q) = bootstrap_orientation(sample) {
                self.q = q;
                self.initialized = true;
            }
            return self.q;
        }

        // Predict.
        self.q = self
            .q
            .integrate_body_rate(vec3::add(sample.gyro, self.integral), dt);

        // Correct.
        let mut error = [0.0; 3];
        let accel_norm = vec3::norm(sample.accel);
        if (accel_norm - STANDARD_GRAVITY).abs() < ACCEL_GATE * STANDARD_GRAVITY {
            let measured = vec3::scale(sample.accel, 1.0 / accel_norm);
            let predicted = self.q.conjugate().rotate([0.0, 0.0, 1.0]);
            error = vec3::add(error, vec3::cross(measured, predicted));
        }
        if let Some(mag) = sample.mag {
            if let Some(measured) = vec3::normalize(mag) {
                // Reference field reconstructed in the horizontal plane of
                // the current estimate, so only heading is corrected.
                let h = self.q.rotate(measured);
                let b = [h[0].hypot(h[1]), 0.0, h[2]];
                if let Some(b) = vec3::normalize(b) {
                    let predicted = self.q.conjugate().rotate(b);
                    error = vec3::add(error, vec3::cross(measured, predicted));
                }
            }
        }
        self.integral = vec3::add(self.integral, vec3::scale(error, self.gains.ki * dt));
        self.q = self
            .q
            .integrate_body_rate(vec3::scale(error, self.gains.kp), dt);
        self.q
    }
}

/// Direct orientation from one accelerometer (and optional magnetometer)
/// reading. Yaw is arbitrary without a magnetometer.
fn bootstrap_orientation(sample: &ImuSample) -> Option<Quaternion> {
    let accel_norm = vec3::norm(sample.accel);
    if (accel_norm - STANDARD_GRAVITY).abs() >= ACCEL_GATE * STANDARD_GRAVITY {
        return None;
    }
    let z_body = vec3::scale(sample.accel, 1.0 / accel_norm);

    // Pick the x axis from the magnetometer when available, otherwise any
    // direction orthogonal to gravity.
    let x_seed = match sample.mag.and_then(vec3::normalize) {
        Some(m) => m,
        None => {
            if z_body[0].abs() < 0.9 {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 1.0, 0.0]
            }
        }
    };
    let x_body = vec3::normalize(vec3::sub(
        x_seed,
        vec3::scale(z_body, vec3::dot(x_seed, z_body)),
    ))?;
    let y_body = vec3::cross(z_body, x_body);

    // Rows of the world-from-body rotation are the world axes expressed in
    // the body frame.
    let m = [
        [x_body[0], x_body[1], x_body[2]],
        [y_body[0], y_body[1], y_body[2]],
        [z_body[0], z_body[1], z_body[2]],
    ];
    Some(Quaternion::from_rotation_matrix(&m))
}
