//! The streaming estimation pipeline: orientation samples in, shape trace
//! out.
//!
//! Per aligned timestamp and per segment, sensors are rebased onto the
//! estimated segment base frame, (α, φ) is extracted from each quaternion,
//! the per-sensor bending directions are sign-aligned and averaged, the
//! modal coefficients are solved from the signed angles, and the whole
//! shape is sampled. Processing one frame touches nothing but that frame
//! and a few scalars of held state, so latency is bounded and independent
//! of history length.

use serde::Serialize;
use thiserror::Error;

use ppc_shape::chain::{sample_shape, ChainError, SegmentState};
use ppc_shape::modal::{ModalError, ModalSolver};
use ppc_shape::orientation::{
    circular_distance, config_to_quaternion, extract_config, wrap_two_pi, OrientationError,
};
use ppc_shape::ppc::ArcCoordinate;
use ppc_shape::quat::Quaternion;

use crate::config::{SensorBinding, ValidatedRobot};
use crate::formats::{QuatStream, ShapeTrace, TraceFrame, TraceRow};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no stream provides sensor id {0}")]
    MissingStream(usize),
    #[error("stream {0} is empty")]
    EmptyStream(usize),
    #[error("sensor streams share no common time window")]
    NoOverlap,
    #[error("all frames were dropped during alignment")]
    NothingAligned,
    #[error(transparent)]
    Orientation(#[from] OrientationError),
    #[error(transparent)]
    Modal(#[from] ModalError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Per-frame diagnostic records surfaced alongside the trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarningKind {
    /// A sensor's local quaternion z component exceeded the twist budget.
    TwistExceeded { sensor_id: usize, residual: f64 },
    /// No sensor of the segment saw a bend above alpha_min; the bending
    /// direction is undefined and the held value was used.
    PhiUndefined,
    /// The sensors disagree about the bending direction beyond the warning
    /// threshold (after sign alignment).
    PhiDisagreement { spread_deg: f64 },
    /// The placement's condition number exceeds the configured threshold.
    IllConditioned { condition: f64 },
    /// A sensor had no sample within half a period of the frame time; the
    /// frame was dropped.
    MissingSample { sensor_id: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameWarning {
    pub t: f64,
    pub segment: Option<usize>,
    #[serde(flatten)]
    pub kind: WarningKind,
}

#[derive(Debug)]
pub struct EstimateResult {
    pub trace: ShapeTrace,
    pub warnings: Vec<FrameWarning>,
    pub frames_processed: usize,
    pub frames_dropped: usize,
}

struct BoundStream<'a> {
    binding: &'a SensorBinding,
    times: Vec<f64>,
    quats: &'a [(f64, Quaternion)],
    half_period: f64,
}

impl BoundStream<'_> {
    /// Nearest sample within half a period, optionally slerped onto t.
    fn sample_at(&self, t: f64, slerp: bool) -> Option<Quaternion> {
        let idx = self.times.partition_point(|&x| x < t);
        let mut best: Option<usize> = None;
        for candidate in [idx.checked_sub(1), Some(idx)].into_iter().flatten() {
            if candidate >= self.times.len() {
                continue;
            }
            if (self.times[candidate] - t).abs() <= self.half_period {
                best = match best {
                    Some(b) if (self.times[b] - t).abs() <= (self.times[candidate] - t).abs() => {
                        Some(b)
                    }
                    _ => Some(candidate),
                };
            }
        }
        let nearest = best?;
        if slerp {
            // Interpolate between the bracketing samples when both exist.
            let (lo, hi) = if self.times[nearest] <= t {
                (nearest, nearest + 1)
            } else {
                (nearest.wrapping_sub(1), nearest)
            };
            if lo < self.times.len() && hi < self.times.len() && self.times[hi] > self.times[lo] {
                let u = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
                if (0.0..=1.0).contains(&u) {
                    return Some(self.quats[lo].1.slerp(&self.quats[hi].1, u));
                }
            }
        }
        Some(self.quats[nearest].1)
    }
}

fn median_dt(times: &[f64]) -> f64 {
    let mut dts: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    if dts.is_empty() {
        return f64::INFINITY;
    }
    dts.sort_by(f64::total_cmp);
    dts[dts.len() / 2]
}

/// Runs the full pipeline over quaternion streams.
pub fn estimate_stream(
    robot: &ValidatedRobot,
    streams: &[QuatStream],
) -> Result<EstimateResult, PipelineError> {
    // Bind every configured sensor to its stream.
    let mut bound = Vec::new();
    for binding in &robot.bindings {
        let stream = streams
            .iter()
            .find(|s| s.sensor_id == binding.stream_id)
            .ok_or(PipelineError::MissingStream(binding.stream_id))?;
        if stream.samples.is_empty() {
            return Err(PipelineError::EmptyStream(binding.stream_id));
        }
        let times: Vec<f64> = stream.samples.iter().map(|s| s.0).collect();
        let half_period = 0.5 * median_dt(&times);
        bound.push(BoundStream {
            binding,
            times,
            quats: &stream.samples,
            half_period,
        });
    }

    // Common window: reference timeline comes from the first sensor.
    let start = bound
        .iter()
        .map(|b| b.times[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let end = bound
        .iter()
        .map(|b| *b.times.last().unwrap())
        .fold(f64::INFINITY, f64::min);
    let slack = bound[0].half_period;
    if start > end + slack {
        return Err(PipelineError::NoOverlap);
    }
    let timeline: Vec<f64> = bound[0]
        .times
        .iter()
        .copied()
        .filter(|&t| t >= start - slack && t <= end + slack)
        .collect();
    if timeline.is_empty() {
        return Err(PipelineError::NoOverlap);
    }

    // One pre-factored solver per segment.
    let mut solvers = Vec::new();
    for spec in &robot.segments {
        solvers.push(ModalSolver::new(spec.placement(), spec.order())?);
    }

    let mut trace = ShapeTrace::default();
    let mut warnings = Vec::new();
    let mut dropped = 0usize;
    let mut held_phi: Vec<Option<f64>> = vec![None; robot.segments.len()];

    'frames: for &t in &timeline {
        // Gather this frame's raw quaternions sensor by sensor.
        let mut measured: Vec<Quaternion> = Vec::with_capacity(bound.len());
        for b in &bound {
            match b.sample_at(t, robot.estimator.slerp_align) {
                Some(q) => {
                    // Undo the mounting: world-from-backbone =
                    // world-from-sensor ∘ (backbone-from-sensor)⁻¹.
                    measured.push((q * b.binding.extrinsic.conjugate()).normalized());
                }
                None => {
                    warnings.push(FrameWarning {
                        t,
                        segment: Some(b.binding.segment),
                        kind: WarningKind::MissingSample {
                            sensor_id: b.binding.stream_id,
                        },
                    });
                    dropped += 1;
                    continue 'frames;
                }
            }
        }

        let mut states: Vec<SegmentState> = Vec::with_capacity(robot.segments.len());
        let mut base_orientation = Quaternion::IDENTITY;
        for segment in 0..robot.segments.len() {
            let solver = &solvers[segment];
            if solver.condition() > robot.estimator.conditioning_threshold {
                warnings.push(FrameWarning {
                    t,
                    segment: Some(segment),
                    kind: WarningKind::IllConditioned {
                        condition: solver.condition(),
                    },
                });
            }

            // Extract per-sensor bend configurations in the segment frame.
            let mut alphas = Vec::new();
            let mut phis = Vec::new();
            let mut weights = Vec::new();
            let mut defined = Vec::new();
            for (b, q_world) in bound.iter().zip(&measured) {
                if b.binding.segment != segment {
                    continue;
                }
                let local = (base_orientation.conjugate() * *q_world).normalized();
                let extraction = extract_config(&local, robot.estimator.alpha_min)?;
                if extraction.twist_residual > robot.estimator.twist_tol {
                    warnings.push(FrameWarning {
                        t,
                        segment: Some(segment),
                        kind: WarningKind::TwistExceeded {
                            sensor_id: b.binding.stream_id,
                            residual: extraction.twist_residual,
                        },
                    });
                }
                alphas.push(extraction.config.alpha);
                phis.push(extraction.config.phi);
                weights.push(b.binding.weight);
                defined.push(extraction.config.phi_defined);
            }

            // Sign-align the per-sensor directions against the clearest
            // bend, so opposite-side sensors of an S-shaped segment agree.
            let reference = alphas
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let ref_phi = phis[reference];
            let mut signed_alphas = alphas.clone();
            let mut aligned_phis = phis.clone();
            for i in 0..alphas.len() {
                if (phis[i] - ref_phi).cos() < 0.0 {
                    signed_alphas[i] = -alphas[i];
                    aligned_phis[i] = wrap_two_pi(phis[i] + std::f64::consts::PI);
                }
            }

            // Weighted circular mean over sensors with a defined direction.
            let mut sx = 0.0;
            let mut sy = 0.0;
            let mut weight_sum = 0.0;
            let mut spread: f64 = 0.0;
            let mut defined_phis = Vec::new();
            for i in 0..aligned_phis.len() {
                if defined[i] {
                    sx += weights[i] * aligned_phis[i].cos();
                    sy += weights[i] * aligned_phis[i].sin();
                    weight_sum += weights[i];
                    defined_phis.push(aligned_phis[i]);
                }
            }
            for i in 0..defined_phis.len() {
                for j in i + 1..defined_phis.len() {
                    spread = spread.max(circular_distance(defined_phis[i], defined_phis[j]));
                }
            }
            if spread > robot.estimator.phi_disagreement_warn {
                warnings.push(FrameWarning {
                    t,
                    segment: Some(segment),
                    kind: WarningKind::PhiDisagreement {
                        spread_deg: spread.to_degrees(),
                    },
                });
            }

            let phi = if weight_sum > 0.0 {
                let phi = wrap_two_pi(sy.atan2(sx));
                held_phi[segment] = Some(phi);
                phi
            } else {
                warnings.push(FrameWarning {
                    t,
                    segment: Some(segment),
                    kind: WarningKind::PhiUndefined,
                });
                if robot.estimator.hold_last_phi {
                    held_phi[segment].unwrap_or(0.0)
                } else {
                    0.0
                }
            };

            let theta = solver.solve(&signed_alphas)?;
            base_orientation = (base_orientation
                * config_to_quaternion(theta.orientation_at(ArcCoordinate::END), phi))
            .normalized();
            states.push(SegmentState { theta, phi, t });
        }

        let samples = sample_shape(&robot.segments, &states, robot.estimator.points_per_segment)?;
        trace.frames.push(TraceFrame {
            t,
            rows: samples
                .into_iter()
                .map(|sample| TraceRow {
                    segment: sample.segment,
                    s: sample.s,
                    position: sample.pose.position,
                    orientation: sample.pose.orientation,
                })
                .collect(),
        });
    }

    if trace.frames.is_empty() {
        return Err(PipelineError::NothingAligned);
    }
    Ok(EstimateResult {
        frames_processed: trace.frames.len(),
        frames_dropped: dropped,
        trace,
        warnings,
    })
}

/// Front end for raw inertial streams: runs one attitude filter per sensor
/// and hands the resulting quaternion streams to `estimate_stream`.
pub fn filter_imu_streams(
    robot: &ValidatedRobot,
    streams: &[crate::formats::ImuStream],
) -> Vec<QuatStream> {
    streams
        .iter()
        .map(|stream| {
            let mut filter = ppc_shape::filter::AttitudeFilter::new(robot.filter_gains);
            let mut samples = Vec::with_capacity(stream.samples.len());
            let mut last_t: Option<f64> = None;
            for sample in &stream.samples {
                let dt = match last_t {
                    Some(prev) if sample.t > prev => sample.t - prev,
                    _ => {
                        // First sample: bootstrap only, no integration step.
                        filter.update(sample, f64::MIN_POSITIVE);
                        last_t = Some(sample.t);
                        samples.push((sample.t, filter.quaternion()));
                        continue;
                    }
                };
                filter.update(sample, dt);
                last_t = Some(sample.t);
                samples.push((sample.t, filter.quaternion()));
            }
            QuatStream {
                sensor_id: stream.sensor_id,
                samples,
            }
        })
        .collect()
}
