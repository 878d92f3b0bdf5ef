//! Ground-truth motion generation and synthetic sensor observation.
//!
//! The simulator is the verification oracle for the estimation pipeline:
//! it produces exact robot shapes from known curvature functions, samples
//! ideal orientation sensors along the backbone, and perturbs them with
//! seeded noise. Curvature profiles may be polynomial (inside the modal
//! span) or carry a localized Gaussian bump that no low-order polynomial
//! reproduces, which is how external mid-body forces are modelled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use thiserror::Error;

use crate::chain::{embed_planar, Pose, ShapeSample};
use crate::filter::{ImuSample, MAG_REFERENCE, STANDARD_GRAVITY};
use crate::modal::SensorPlacement;
use crate::orientation::{config_to_quaternion, wrap_two_pi};
use crate::ppc::{ModalConfig, PlanarPoint, PpcError};
use crate::quadrature;
use crate::quat::Quaternion;
use crate::special::erf;
use crate::vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("trajectory rate and duration must be positive")]
    InvalidTimeBase,
    #[error("frame has {truth} segments but {given} lengths were provided")]
    SegmentCountMismatch { truth: usize, given: usize },
    #[error(transparent)]
    Ppc(#[from] PpcError),
}

/// Smooth curvature bump exp(−(s−center)²/(2·width²)) scaled by `gain`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBump {
    pub gain: f64,
    pub center: f64,
    pub width: f64,
}

impl GaussianBump {
    fn curvature_at(&self, s: f64) -> f64 {
        let u = (s - self.center) / self.width;
        self.gain * (-0.5 * u * u).exp()
    }

    /// ∫₀ˢ of the bump, in closed form through erf.
    fn integral_to(&self, s: f64) -> f64 {
        let scale = self.width * (std::f64::consts::PI / 2.0).sqrt();
        let root2 = std::f64::consts::SQRT_2;
        self.gain
            * scale
            * (erf((s - self.center) / (self.width * root2))
                - erf(-self.center / (self.width * root2)))
    }
}

/// True curvature of one segment: either exactly polynomial or a
/// polynomial plus a bump outside the modal span. Both are smooth in s.
#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureProfile {
    Polynomial(ModalConfig),
    Perturbed { base: ModalConfig, bump: GaussianBump },
}

impl CurvatureProfile {
    pub fn curvature_at(&self, s: f64) -> f64 {
        match self {
            CurvatureProfile::Polynomial(theta) => {
                theta.coeffs().iter().rev().fold(0.0, |acc, &c| acc * s + c)
            }
            CurvatureProfile::Perturbed { base, bump } => {
                CurvatureProfile::Polynomial(base.clone()).curvature_at(s) + bump.curvature_at(s)
            }
        }
    }

    /// Exact in-plane angle α(s) = ∫₀ˢ curvature.
    pub fn alpha_at(&self, s: f64) -> f64 {
        match self {
            CurvatureProfile::Polynomial(theta) => theta.orientation_raw(s),
            CurvatureProfile::Perturbed { base, bump } => {
                base.orientation_raw(s) + bump.integral_to(s)
            }
        }
    }

    /// α(s) by adaptive quadrature of the curvature; independent of the
    /// closed forms above and used as their oracle.
    pub fn alpha_by_quadrature(&self, s: f64, tol: f64) -> Result<f64, SimError> {
        Ok(quadrature::integrate(|v| self.curvature_at(v), 0.0, s, tol)
            .map_err(PpcError::from)?)
    }

    pub fn as_polynomial(&self) -> Option<&ModalConfig> {
        match self {
            CurvatureProfile::Polynomial(theta) => Some(theta),
            CurvatureProfile::Perturbed { .. } => None,
        }
    }
}

/// True state of one segment at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentTruth {
    pub curvature: CurvatureProfile,
    pub phi: f64,
}

/// True state of the whole robot at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthFrame {
    pub t: f64,
    pub segments: Vec<SegmentTruth>,
}

/// Motion scenario kinds, mirroring the physical test programme: slow
/// swings, damped free oscillation, tip and mid-body force interaction,
/// and a spatial circular sweep of the bending direction.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryKind {
    /// Slow sinusoidal bending with a fixed bending direction.
    Swing {
        amplitude: f64,
        ratio: f64,
        frequency_hz: f64,
        phi: f64,
    },
    /// Released from the maximum deflection, oscillating with exponential
    /// decay; stresses the dynamic response of the attitude stage.
    FreeOscillation {
        amplitude: f64,
        ratio: f64,
        frequency_hz: f64,
        damping_ratio: f64,
        phi: f64,
    },
    /// A tip load shifts the linear-curvature coefficients mid-scenario;
    /// the true shape stays representable at order 1.
    TipInteraction {
        base: [f64; 2],
        shift: [f64; 2],
        phi: f64,
    },
    /// A mid-body load adds a localized curvature bump that no order-1
    /// model represents.
    BodyInteraction {
        base: [f64; 2],
        bump_gain: f64,
        bump_width: f64,
        phi: f64,
    },
    /// Constant moderate bend whose direction sweeps a full circle.
    Circular3d { bend: [f64; 2], sweep_hz: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    pub duration: f64,
    pub rate: f64,
}

/// Smooth 0→1 ramp used for applied loads (C¹, flat at both ends).
fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// Generates ground-truth frames at the requested rate; all segments
/// follow the same modal trajectory. Pure function of its arguments.
pub fn gen_trajectory(
    spec: &TrajectorySpec,
    segment_count: usize,
) -> Result<Vec<GroundTruthFrame>, SimError> {
    if !(spec.rate > 0.0 && spec.duration > 0.0) {
        return Err(SimError::InvalidTimeBase);
    }
    let steps = (spec.duration * spec.rate).floor() as usize;
    let mut frames = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 / spec.rate;
        let segment = segment_truth_at(&spec.kind, t, spec.duration)?;
        frames.push(GroundTruthFrame {
            t,
            segments: vec![segment; segment_count],
        });
    }
    Ok(frames)
}

fn segment_truth_at(kind: &TrajectoryKind, t: f64, duration: f64) -> Result<SegmentTruth, SimError> {
    let truth = match *kind {
        TrajectoryKind::Swing {
            amplitude,
            ratio,
            frequency_hz,
            phi,
        } => {
            let level = amplitude * (std::f64::consts::TAU * frequency_hz * t).sin();
            SegmentTruth {
                curvature: CurvatureProfile::Polynomial(ModalConfig::new(vec![
                    level,
                    level * ratio,
                ])?),
                phi,
            }
        }
        TrajectoryKind::FreeOscillation {
            amplitude,
            ratio,
            frequency_hz,
            damping_ratio,
            phi,
        } => {
            let omega = std::f64::consts::TAU * frequency_hz;
            let damped = omega * (1.0 - damping_ratio * damping_ratio).max(0.0).sqrt();
            let level = amplitude * (-damping_ratio * omega * t).exp() * (damped * t).cos();
            SegmentTruth {
                curvature: CurvatureProfile::Polynomial(ModalConfig::new(vec![
                    level,
                    level * ratio,
                ])?),
                phi,
            }
        }
        TrajectoryKind::TipInteraction { base, shift, phi } => {
            let ramp = load_ramp(t, duration);
            SegmentTruth {
                curvature: CurvatureProfile::Polynomial(ModalConfig::new(vec![
                    base[0] + ramp * shift[0],
                    base[1] + ramp * shift[1],
                ])?),
                phi,
            }
        }
        TrajectoryKind::BodyInteraction {
            base,
            bump_gain,
            bump_width,
            phi,
        } => {
            let ramp = load_ramp(t, duration);
            SegmentTruth {
                curvature: CurvatureProfile::Perturbed {
                    base: ModalConfig::new(vec![base[0], base[1]])?,
                    bump: GaussianBump {
                        gain: ramp * bump_gain,
                        center: 0.5,
                        width: bump_width,
                    },
                },
                phi,
            }
        }
        TrajectoryKind::Circular3d { bend, sweep_hz } => SegmentTruth {
            curvature: CurvatureProfile::Polynomial(ModalConfig::new(vec![bend[0], bend[1]])?),
            phi: wrap_two_pi(std::f64::consts::TAU * sweep_hz * t),
        },
    };
    Ok(truth)
}

/// External load profile: off for the first 40% of the scenario, smoothly
/// ramped to full over the next 20%, then held.
fn load_ramp(t: f64, duration: f64) -> f64 {
    smoothstep((t / duration - 0.4) / 0.2)
}

/// Orientation of a point of one segment relative to the segment base.
pub fn true_local_orientation(frame: &GroundTruthFrame, segment: usize, s: f64) -> Quaternion {
    let truth = &frame.segments[segment];
    config_to_quaternion(truth.curvature.alpha_at(s), truth.phi)
}

/// World orientation of a point, composing all preceding segments at their
/// full extent.
pub fn true_world_orientation(frame: &GroundTruthFrame, segment: usize, s: f64) -> Quaternion {
    let mut q = Quaternion::IDENTITY;
    for i in 0..segment {
        q = (q * true_local_orientation(frame, i, 1.0)).normalized();
    }
    (q * true_local_orientation(frame, segment, s)).normalized()
}

/// True shape of one frame sampled on an even grid, by adaptive quadrature
/// of the exact curvature profiles.
pub fn true_shape(
    frame: &GroundTruthFrame,
    lengths: &[f64],
    points_per_segment: usize,
) -> Result<Vec<ShapeSample>, SimError> {
    if lengths.len() != frame.segments.len() {
        return Err(SimError::SegmentCountMismatch {
            truth: frame.segments.len(),
            given: lengths.len(),
        });
    }
    let n = points_per_segment.max(2);
    let mut out = Vec::with_capacity(lengths.len() * n);
    let mut base = Pose::IDENTITY;
    for (index, (truth, &length)) in frame.segments.iter().zip(lengths).enumerate() {
        let mut acc = (0.0, 0.0);
        let mut prev = 0.0;
        for k in 0..n {
            let s = k as f64 / (n - 1) as f64;
            if s > prev {
                let step = quadrature::integrate_direction(
                    |v| truth.curvature.alpha_at(v),
                    prev,
                    s,
                    1e-12,
                )
                .map_err(PpcError::from)?;
                acc.0 += step.0;
                acc.1 += step.1;
                prev = s;
            }
            let local = embed_planar(
                PlanarPoint {
                    x: length * acc.0,
                    y: length * acc.1,
                },
                truth.curvature.alpha_at(s),
                truth.phi,
            );
            out.push(ShapeSample {
                segment: index,
                s,
                pose: base.compose(&local),
            });
        }
        let end = embed_planar(
            PlanarPoint {
                x: length * acc.0,
                y: length * acc.1,
            },
            truth.curvature.alpha_at(1.0),
            truth.phi,
        );
        base = base.compose(&end);
    }
    Ok(out)
}

/// One timestamped orientation measurement attributed to a sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationSample {
    pub t: f64,
    pub sensor_id: usize,
    pub q: Quaternion,
}

/// One synthetic sensor channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorChannel<T> {
    pub sensor_id: usize,
    pub segment: usize,
    pub location: f64,
    pub samples: Vec<T>,
}

fn sensor_layout(placements: &[SensorPlacement]) -> Vec<(usize, usize, f64)> {
    let mut layout = Vec::new();
    let mut id = 0;
    for (segment, placement) in placements.iter().enumerate() {
        for &location in placement.locations() {
            layout.push((id, segment, location));
            id += 1;
        }
    }
    layout
}

/// Interpolates the true world orientation at an arbitrary time by slerp
/// between bracketing frames.
fn world_orientation_at_time(
    frames: &[GroundTruthFrame],
    t: f64,
    segment: usize,
    location: f64,
) -> Quaternion {
    let last = frames.len() - 1;
    let idx = frames.partition_point(|f| f.t <= t).saturating_sub(1);
    let lo = idx.min(last);
    let hi = (lo + 1).min(last);
    let qa = true_world_orientation(&frames[lo], segment, location);
    if hi == lo || frames[hi].t <= frames[lo].t {
        return qa;
    }
    let qb = true_world_orientation(&frames[hi], segment, location);
    let u = ((t - frames[lo].t) / (frames[hi].t - frames[lo].t)).clamp(0.0, 1.0);
    qa.slerp(&qb, u)
}

/// Samples noiseless-truth quaternions at the sensor locations and
/// perturbs each by a random small rotation about an isotropic axis with
/// the given angular standard deviation (degrees). Deterministic in the
/// seed; signs are canonical.
pub fn synth_sensor_stream(
    frames: &[GroundTruthFrame],
    placements: &[SensorPlacement],
    noise_deg: f64,
    rate: f64,
    seed: u64,
) -> Vec<SensorChannel<OrientationSample>> {
    assert!(!frames.is_empty() && rate > 0.0);
    let duration = frames.last().unwrap().t;
    let steps = (duration * rate).floor() as usize;
    let sigma = noise_deg.to_radians();
    let normal = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    sensor_layout(placements)
        .into_iter()
        .map(|(sensor_id, segment, location)| {
            let samples = (0..=steps)
                .map(|k| {
                    let t = k as f64 / rate;
                    let mut q = world_orientation_at_time(frames, t, segment, location);
                    if noise_deg > 0.0 {
                        let axis: [f64; 3] = UnitSphere.sample(&mut rng);
                        let angle: f64 = normal.sample(&mut rng);
                        q = (Quaternion::from_axis_angle(axis, angle) * q).normalized();
                    }
                    OrientationSample {
                        t,
                        sensor_id,
                        q: q.canonicalized(),
                    }
                })
                .collect();
            SensorChannel {
                sensor_id,
                segment,
                location,
                samples,
            }
        })
        .collect()
}

/// Noise levels for raw inertial synthesis. Gyro in deg/s, accel in m/s²,
/// mag as a fraction of the unit field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuNoise {
    pub gyro_dps: f64,
    pub accel_sigma: f64,
    pub mag_sigma: f64,
}

/// Differentiates the true quaternion trajectory to body angular rate,
/// projects gravity (and the magnetic reference) into the body frame, and
/// adds white noise.
pub fn synth_imu_raw(
    frames: &[GroundTruthFrame],
    placements: &[SensorPlacement],
    noise: ImuNoise,
    rate: f64,
    seed: u64,
) -> Vec<SensorChannel<ImuSample>> {
    assert!(!frames.is_empty() && rate > 0.0);
    let duration = frames.last().unwrap().t;
    let steps = (duration * rate).floor() as usize;
    let dt = 1.0 / rate;
    let gyro_sigma = noise.gyro_dps.to_radians();
    let gauss = Normal::new(0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x494d_5553);

    sensor_layout(placements)
        .into_iter()
        .map(|(sensor_id, segment, location)| {
            let samples = (0..=steps)
                .map(|k| {
                    let t = k as f64 / rate;
                    let q_now = world_orientation_at_time(frames, t, segment, location);
                    // Backward difference: a sample's gyro is the mean body
                    // rate over the step ending at its timestamp, matching
                    // how a discrete attitude integrator consumes it. The
                    // first sample has no preceding step and reads zero.
                    let q_prev =
                        world_orientation_at_time(frames, (t - dt).max(0.0), segment, location);
                    let omega = vec3::scale(
                        (q_prev.conjugate() * q_now).to_rotation_vector(),
                        1.0 / dt,
                    );
                    let gravity_body = q_now
                        .conjugate()
                        .rotate([0.0, 0.0, STANDARD_GRAVITY]);
                    let mag_body = q_now.conjugate().rotate(MAG_REFERENCE);
                    let mut draw = |sigma: f64| {
                        if sigma > 0.0 {
                            sigma * gauss.sample(&mut rng)
                        } else {
                            // Keep the draw count fixed so channels stay
                            // reproducible across noise settings.
                            let _ = gauss.sample(&mut rng);
                            0.0
                        }
                    };
                    ImuSample {
                        t,
                        gyro: [
                            omega[0] + draw(gyro_sigma),
                            omega[1] + draw(gyro_sigma),
                            omega[2] + draw(gyro_sigma),
                        ],
                        accel: [
                            gravity_body[0] + draw(noise.accel_sigma),
                            gravity_body[1] + draw(noise.accel_sigma),
                            gravity_body[2] + draw(noise.accel_sigma),
                        ],
                        mag: Some([
                            mag_body[0] + draw(noise.mag_sigma),
                            mag_body[1] + draw(noise.mag_sigma),
                            mag_body[2] + draw(noise.mag_sigma),
                        ]),
                    }
                })
                .collect();
            SensorChannel {
                sensor_id,
                segment,
                location,
                samples,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppc::ArcCoordinate;

    fn swing_spec(amplitude: f64) -> TrajectorySpec {
        TrajectorySpec {
            kind: TrajectoryKind::Swing {
                amplitude,
                ratio: 0.4,
                frequency_hz: 0.25,
                phi: 0.0,
            },
            duration: 2.0,
            rate: 60.0,
        }
    }

    #[test]
    fn zero_amplitude_swing_is_straight() {
        let frames = gen_trajectory(&swing_spec(0.0), 1).unwrap();
        for frame in &frames {
            for s in [0.2, 0.7, 1.0] {
                assert_eq!(frame.segments[0].curvature.curvature_at(s), 0.0);
            }
            let q = true_world_orientation(frame, 0, 1.0);
            assert!(q.angle_to(&Quaternion::IDENTITY) < 1e-15);
        }
    }

    #[test]
    fn undamped_oscillation_is_periodic() {
        let spec = TrajectorySpec {
            kind: TrajectoryKind::FreeOscillation {
                amplitude: 1.0,
                ratio: 0.3,
                frequency_hz: 1.0,
                damping_ratio: 0.0,
                phi: 0.0,
            },
            duration: 3.0,
            rate: 60.0,
        };
        let frames = gen_trajectory(&spec, 1).unwrap();
        // One period at 60 Hz is exactly 60 frames.
        for k in 0..60 {
            let a = frames[k].segments[0].curvature.curvature_at(0.5);
            let b = frames[k + 60].segments[0].curvature.curvature_at(0.5);
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn alpha_closed_form_matches_quadrature() {
        let profiles = [
            CurvatureProfile::Polynomial(ModalConfig::new(vec![0.9, -0.5, 0.3]).unwrap()),
            CurvatureProfile::Perturbed {
                base: ModalConfig::new(vec![1.0, 0.4]).unwrap(),
                bump: GaussianBump {
                    gain: 1.2,
                    center: 0.5,
                    width: 0.1,
                },
            },
        ];
        for profile in &profiles {
            for k in 0..=10 {
                let s = k as f64 / 10.0;
                let closed = profile.alpha_at(s);
                let quad = profile.alpha_by_quadrature(s, 1e-13).unwrap();
                assert!((closed - quad).abs() < 1e-11, "s={s}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn polynomial_orientation_matches_modal_path() {
        let spec = swing_spec(1.1);
        let frames = gen_trajectory(&spec, 1).unwrap();
        let frame = &frames[37];
        let theta = frame.segments[0].curvature.as_polynomial().unwrap();
        for s in [0.25, 0.5, 1.0] {
            let via_modal = config_to_quaternion(
                theta.orientation_at(ArcCoordinate::new(s).unwrap()),
                frame.segments[0].phi,
            );
            let via_truth = true_local_orientation(frame, 0, s);
            assert!(via_modal.angle_to(&via_truth) < 1e-12);
        }
    }

    #[test]
    fn bump_alpha_includes_integrated_contribution_past_center() {
        let bump = GaussianBump {
            gain: 1.0,
            center: 0.5,
            width: 0.08,
        };
        let base = ModalConfig::new(vec![0.5, 0.2]).unwrap();
        let profile = CurvatureProfile::Perturbed {
            base: base.clone(),
            bump,
        };
        // Past the bump nearly its whole mass has been integrated.
        let mass = bump.gain * bump.width * (std::f64::consts::TAU).sqrt() / 2.0 * 2.0;
        let extra = profile.alpha_at(1.0) - base.orientation_raw(1.0);
        assert!((extra - mass).abs() < 1e-6 * mass.max(1.0) + 1e-9);
    }

    #[test]
    fn body_interaction_defeats_order1_fit() {
        // Least-squares fit of α(s) within a modal order over a dense grid.
        let residual = |profile: &CurvatureProfile, order: usize| -> f64 {
            let n = 200;
            let mut a = nalgebra::DMatrix::zeros(n, order + 1);
            let mut b = nalgebra::DVector::zeros(n);
            for i in 0..n {
                let s = (i + 1) as f64 / n as f64;
                for k in 0..=order {
                    a[(i, k)] = s.powi(k as i32 + 1) / (k as f64 + 1.0);
                }
                b[i] = profile.alpha_at(s);
            }
            let sol = a.clone().svd(true, true).solve(&b, 1e-12).unwrap();
            (a * sol - b).norm()
        };

        let tip = CurvatureProfile::Polynomial(ModalConfig::new(vec![1.3, -0.2]).unwrap());
        let body = CurvatureProfile::Perturbed {
            base: ModalConfig::new(vec![1.0, 0.4]).unwrap(),
            bump: GaussianBump {
                gain: 1.2,
                center: 0.5,
                width: 0.1,
            },
        };
        let tip_residual = residual(&tip, 1);
        let body_residual = residual(&body, 1);
        assert!(body_residual > 10.0 * tip_residual.max(1e-12));
    }

    #[test]
    fn noiseless_streams_equal_truth() {
        let spec = swing_spec(1.0);
        let frames = gen_trajectory(&spec, 1).unwrap();
        let placements = [SensorPlacement::new(vec![0.5, 1.0]).unwrap()];
        let channels = synth_sensor_stream(&frames, &placements, 0.0, 60.0, 7);
        assert_eq!(channels.len(), 2);
        for channel in &channels {
            for (k, sample) in channel.samples.iter().enumerate() {
                let truth =
                    true_world_orientation(&frames[k], channel.segment, channel.location);
                assert!(sample.q.angle_to(&truth) < 1e-12);
                assert!(sample.q.w >= 0.0);
            }
        }
    }

    #[test]
    fn noise_rms_matches_requested_sigma() {
        let spec = swing_spec(0.8);
        let frames = gen_trajectory(
            &TrajectorySpec {
                duration: 170.0,
                ..spec
            },
            1,
        )
        .unwrap();
        let placements = [SensorPlacement::new(vec![1.0]).unwrap()];
        let noisy = synth_sensor_stream(&frames, &placements, 0.5, 60.0, 11);
        let clean = synth_sensor_stream(&frames, &placements, 0.0, 60.0, 11);
        let n = noisy[0].samples.len();
        assert!(n > 10_000);
        let mean_square: f64 = noisy[0]
            .samples
            .iter()
            .zip(&clean[0].samples)
            .map(|(a, b)| {
                let e = a.q.angle_to(&b.q);
                e * e
            })
            .sum::<f64>()
            / n as f64;
        let rms_deg = mean_square.sqrt().to_degrees();
        assert!((rms_deg - 0.5).abs() < 0.025, "rms {rms_deg}");
    }

    #[test]
    fn streams_are_deterministic() {
        let frames = gen_trajectory(&swing_spec(1.0), 2).unwrap();
        let placements = [
            SensorPlacement::new(vec![0.5, 1.0]).unwrap(),
            SensorPlacement::new(vec![0.5, 1.0]).unwrap(),
        ];
        let a = synth_sensor_stream(&frames, &placements, 0.5, 60.0, 42);
        let b = synth_sensor_stream(&frames, &placements, 0.5, 60.0, 42);
        assert_eq!(a, b);
        let c = synth_sensor_stream(&frames, &placements, 0.5, 60.0, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn static_imu_measures_gravity() {
        // Zero frequency freezes the swing at its (straight) start.
        let spec = TrajectorySpec {
            kind: TrajectoryKind::Swing {
                amplitude: 0.9,
                ratio: 0.4,
                frequency_hz: 0.0,
                phi: 0.0,
            },
            duration: 1.0,
            rate: 60.0,
        };
        let frames = gen_trajectory(&spec, 1).unwrap();
        let placements = [SensorPlacement::new(vec![1.0]).unwrap()];
        let channels = synth_imu_raw(
            &frames,
            &placements,
            ImuNoise {
                gyro_dps: 0.0,
                accel_sigma: 0.0,
                mag_sigma: 0.0,
            },
            60.0,
            3,
        );
        for sample in &channels[0].samples {
            assert!(vec3::norm(sample.gyro) < 1e-9);
            assert!((vec3::norm(sample.accel) - STANDARD_GRAVITY).abs() < 1e-9);
        }
    }

    #[test]
    fn sweeping_bend_direction_gives_analytic_gyro_magnitude() {
        // A fixed bend α whose direction sweeps at rate u is a coning
        // motion: the body rate vector rotates but its magnitude is the
        // constant 2·u·sin(α/2).
        let sweep_hz = 0.1;
        let spec = TrajectorySpec {
            kind: TrajectoryKind::Circular3d {
                bend: [1.0, 0.0],
                sweep_hz,
            },
            duration: 5.0,
            rate: 60.0,
        };
        let frames = gen_trajectory(&spec, 1).unwrap();
        let placements = [SensorPlacement::new(vec![1.0]).unwrap()];
        let channels = synth_imu_raw(
            &frames,
            &placements,
            ImuNoise {
                gyro_dps: 0.0,
                accel_sigma: 0.0,
                mag_sigma: 0.0,
            },
            60.0,
            5,
        );
        let u = std::f64::consts::TAU * sweep_hz;
        let expected = 2.0 * u * (0.5f64).sin();
        // The first sample has no preceding step and reads zero.
        let samples = &channels[0].samples;
        for sample in &samples[1..] {
            let mag = vec3::norm(sample.gyro);
            assert!(
                (mag - expected).abs() < 1e-4 * expected,
                "gyro magnitude {mag} vs {expected}"
            );
        }
    }
}
