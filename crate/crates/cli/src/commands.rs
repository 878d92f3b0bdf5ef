//! Subcommand implementations, shared by the binary and the test suites.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ppc_shape::modal::{placement_conditioning, system_determinant, SensorPlacement};
use ppc_shape::ppc::{ArcCoordinate, ModalConfig};
use ppc_shape::sim::{
    gen_trajectory, synth_imu_raw, synth_sensor_stream, ImuNoise, TrajectoryKind, TrajectorySpec,
};
use ppc_shape::uncertainty::{position_covariance, uncertainty_ellipse, QuatNoise};

use crate::config::{RobotConfig, ScenarioConfig, ValidatedRobot};
use crate::evaluate::{evaluate, EvaluateOptions, ErrorReport};
use crate::formats::{self, ShapeTrace, TraceFrame, TraceRow};
use crate::pipeline::{estimate_stream, filter_imu_streams, EstimateResult};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Format(#[from] crate::formats::FormatError),
    #[error(transparent)]
    Pipeline(#[from] crate::pipeline::PipelineError),
    #[error(transparent)]
    Evaluate(#[from] crate::evaluate::EvaluateError),
    #[error(transparent)]
    Sim(#[from] ppc_shape::sim::SimError),
    #[error(transparent)]
    Uncertainty(#[from] ppc_shape::uncertainty::UncertaintyError),
    #[error("unknown scenario {0:?}; expected swing, free_oscillation, tip_interaction, body_interaction or circular_3d")]
    UnknownScenario(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// Stable machine-readable error kind for the exit record.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Format(_) => "format",
            CliError::Pipeline(_) => "pipeline",
            CliError::Evaluate(_) => "evaluate",
            CliError::Sim(_) => "simulation",
            CliError::Uncertainty(_) => "uncertainty",
            CliError::UnknownScenario(_) => "unknown_scenario",
            CliError::InvalidArgument(_) => "invalid_argument",
            CliError::Io { .. } => "io",
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Maps a scenario name onto a trajectory specification using the config's
/// scenario parameters.
pub fn trajectory_spec(name: &str, sc: &ScenarioConfig) -> Result<TrajectorySpec, CliError> {
    let phi = sc.phi_deg.to_radians();
    let kind = match name {
        "swing" => TrajectoryKind::Swing {
            amplitude: sc.amplitude,
            ratio: sc.ratio,
            frequency_hz: sc.frequency_hz,
            phi,
        },
        "free_oscillation" => TrajectoryKind::FreeOscillation {
            amplitude: sc.amplitude,
            ratio: sc.ratio,
            frequency_hz: sc.frequency_hz,
            damping_ratio: sc.damping_ratio,
            phi,
        },
        "tip_interaction" => TrajectoryKind::TipInteraction {
            base: sc.base,
            shift: sc.tip_shift,
            phi,
        },
        "body_interaction" => TrajectoryKind::BodyInteraction {
            base: sc.base,
            bump_gain: sc.bump_gain,
            bump_width: sc.bump_width,
            phi,
        },
        "circular_3d" => TrajectoryKind::Circular3d {
            bend: sc.bend,
            sweep_hz: sc.sweep_hz,
        },
        other => return Err(CliError::UnknownScenario(other.to_string())),
    };
    Ok(TrajectorySpec {
        kind,
        duration: sc.duration_s,
        rate: sc.rate_hz,
    })
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub scenario: String,
    pub seed: u64,
    pub frames: usize,
    pub sensors: usize,
    pub truth: PathBuf,
    pub quaternion_streams: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imu_streams: Option<PathBuf>,
}

/// Simulates a scenario: writes the ground-truth trace and the synthetic
/// sensor streams (quaternion always, raw IMU on request).
pub fn run_simulate(
    config_path: &Path,
    scenario: &str,
    seed: u64,
    out_dir: &Path,
    with_imu: bool,
) -> Result<SimulateSummary, CliError> {
    let robot = RobotConfig::load(config_path)?.validate()?;
    let spec = trajectory_spec(scenario, &robot.scenario)?;
    let frames = gen_trajectory(&spec, robot.segments.len())?;
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;

    // Ground truth trace.
    let lengths: Vec<f64> = robot.segments.iter().map(|s| s.length()).collect();
    let mut truth = ShapeTrace::default();
    for frame in &frames {
        let samples =
            ppc_shape::sim::true_shape(frame, &lengths, robot.estimator.points_per_segment)?;
        truth.frames.push(TraceFrame {
            t: frame.t,
            rows: samples
                .into_iter()
                .map(|s| TraceRow {
                    segment: s.segment,
                    s: s.s,
                    position: s.pose.position,
                    orientation: s.pose.orientation,
                })
                .collect(),
        });
    }
    let truth_path = out_dir.join("truth.csv");
    formats::write_trace_csv(&truth_path, &truth)?;

    // Quaternion sensor streams: backbone orientations into sensor frames,
    // renumbered onto the configured stream ids.
    let mut channels = synth_sensor_stream(
        &frames,
        &robot.placements(),
        robot.noise.orientation_deg,
        spec.rate,
        seed,
    );
    for (channel, binding) in channels.iter_mut().zip(&robot.bindings) {
        channel.sensor_id = binding.stream_id;
        for sample in channel.samples.iter_mut() {
            sample.sensor_id = binding.stream_id;
            sample.q = (sample.q * binding.extrinsic).canonicalized();
        }
    }
    let stream_path = out_dir.join("sensors.jsonl");
    formats::write_quaternion_streams(&stream_path, &channels)?;

    let imu_path = if with_imu {
        let mut imu_channels = synth_imu_raw(
            &frames,
            &robot.placements(),
            ImuNoise {
                gyro_dps: robot.noise.gyro_dps,
                accel_sigma: robot.noise.accel_sigma,
                mag_sigma: robot.noise.mag_sigma,
            },
            spec.rate,
            seed,
        );
        for (channel, binding) in imu_channels.iter_mut().zip(&robot.bindings) {
            channel.sensor_id = binding.stream_id;
            let to_sensor = binding.extrinsic.conjugate();
            for sample in channel.samples.iter_mut() {
                sample.gyro = to_sensor.rotate(sample.gyro);
                sample.accel = to_sensor.rotate(sample.accel);
                sample.mag = sample.mag.map(|m| to_sensor.rotate(m));
            }
        }
        let path = out_dir.join("imu.jsonl");
        formats::write_imu_streams(&path, &imu_channels)?;
        Some(path)
    } else {
        None
    };

    Ok(SimulateSummary {
        scenario: scenario.to_string(),
        seed,
        frames: frames.len(),
        sensors: robot.bindings.len(),
        truth: truth_path,
        quaternion_streams: stream_path,
        imu_streams: imu_path,
    })
}

#[derive(Debug, Serialize)]
pub struct EstimateSummary {
    pub frames: usize,
    pub dropped: usize,
    pub warnings: usize,
    pub trace: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warnings_file: Option<PathBuf>,
}

/// Runs the estimation pipeline over recorded streams. `raw_imu` switches
/// the input to inertial records put through the attitude filter first.
pub fn run_estimate(
    config_path: &Path,
    sensors_dir: &Path,
    out_trace: &Path,
    warnings_out: Option<&Path>,
    raw_imu: bool,
) -> Result<EstimateSummary, CliError> {
    let robot = RobotConfig::load(config_path)?.validate()?;
    let result = estimate_from_dir(&robot, sensors_dir, raw_imu)?;
    formats::write_trace_csv(out_trace, &result.trace)?;

    let warnings_file = match warnings_out {
        Some(path) => {
            let mut lines = String::new();
            for w in &result.warnings {
                lines.push_str(&serde_json::to_string(w).expect("serializable warning"));
                lines.push('\n');
            }
            std::fs::write(path, lines).map_err(|e| io_err(path, e))?;
            Some(path.to_path_buf())
        }
        None => None,
    };
    for w in &result.warnings {
        log::debug!("warning at t={}: {:?}", w.t, w.kind);
    }
    if !result.warnings.is_empty() {
        log::warn!("{} diagnostic warnings recorded", result.warnings.len());
    }

    Ok(EstimateSummary {
        frames: result.frames_processed,
        dropped: result.frames_dropped,
        warnings: result.warnings.len(),
        trace: out_trace.to_path_buf(),
        warnings_file,
    })
}

/// Reads streams from a simulation output directory and estimates.
pub fn estimate_from_dir(
    robot: &ValidatedRobot,
    sensors_dir: &Path,
    raw_imu: bool,
) -> Result<EstimateResult, CliError> {
    let streams = if raw_imu {
        let imu = formats::read_imu_streams(&sensors_dir.join("imu.jsonl"))?;
        filter_imu_streams(robot, &imu)
    } else {
        formats::read_quaternion_streams(&sensors_dir.join("sensors.jsonl"))?
    };
    Ok(estimate_stream(robot, &streams)?)
}

/// Compares an estimated trace against ground truth and writes the report.
pub fn run_evaluate(
    estimated_path: &Path,
    truth_path: &Path,
    out_report: &Path,
    frame_csv: Option<&Path>,
    skip_initial: f64,
    scenario: Option<String>,
) -> Result<ErrorReport, CliError> {
    let estimated = formats::read_trace_csv(estimated_path)?;
    let truth = formats::read_trace_csv(truth_path)?;
    let (mut report, frames) = evaluate(
        &estimated,
        &truth,
        &EvaluateOptions {
            skip_initial,
            expected_points: None,
        },
    )?;
    report.scenario = scenario;
    formats::write_json_pretty(out_report, &report)?;
    if let Some(path) = frame_csv {
        crate::evaluate::write_frame_errors_csv(path, &frames)?;
    }
    Ok(report)
}

/// State file for the `ellipse` subcommand.
#[derive(Debug, Deserialize)]
pub struct StateFile {
    #[serde(default)]
    pub segment: usize,
    pub theta: Vec<f64>,
    #[serde(default)]
    pub w_values: Option<Vec<f64>>,
    #[serde(default)]
    pub sigma_w: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct EllipseOutput {
    pub segment: usize,
    pub s: f64,
    pub confidence: f64,
    pub sigma_w: Vec<f64>,
    pub covariance_m2: [[f64; 2]; 2],
    pub semi_axes_m: [f64; 2],
    pub angle_rad: f64,
}

/// Propagates sensor noise through the configured placement at one state
/// and reports the position confidence ellipse in the bending plane.
pub fn run_ellipse(
    config_path: &Path,
    state_path: &Path,
    s: f64,
    confidence: f64,
) -> Result<EllipseOutput, CliError> {
    let robot = RobotConfig::load(config_path)?.validate()?;
    let text = std::fs::read_to_string(state_path).map_err(|e| io_err(state_path, e))?;
    let state: StateFile = serde_json::from_str(&text)
        .map_err(|e| CliError::InvalidArgument(format!("state file: {e}")))?;
    let spec = robot
        .segments
        .get(state.segment)
        .ok_or_else(|| CliError::InvalidArgument(format!("no segment {}", state.segment)))?;
    let theta = ModalConfig::new(state.theta.clone())
        .map_err(|e| CliError::InvalidArgument(format!("theta: {e}")))?;
    if theta.order() != spec.order() {
        return Err(CliError::InvalidArgument(format!(
            "theta order {} does not match segment order {}",
            theta.order(),
            spec.order()
        )));
    }
    let s = ArcCoordinate::new(s)
        .map_err(|e| CliError::InvalidArgument(format!("arc coordinate: {e}")))?;

    let placement = spec.placement();
    let alphas: Vec<f64> = placement
        .locations()
        .iter()
        .map(|&sk| theta.orientation_at(ArcCoordinate::clamped(sk)))
        .collect();
    let w_values: Vec<f64> = match &state.w_values {
        Some(w) => w.clone(),
        None => alphas.iter().map(|a| (a / 2.0).cos()).collect(),
    };
    // Angular sensor noise maps onto the quaternion scalar with local
    // sensitivity dw/dα = −sin(α/2)/2.
    let sigma_w: Vec<f64> = match &state.sigma_w {
        Some(s) => s.clone(),
        None => {
            let sigma_alpha = robot.noise.orientation_deg.to_radians();
            alphas
                .iter()
                .map(|a| 0.5 * (a / 2.0).sin().abs() * sigma_alpha)
                .collect()
        }
    };
    let noise = QuatNoise::new(sigma_w.clone())?;
    let cov = position_covariance(placement, &w_values, &theta, s, spec.length(), &noise)?;
    let ellipse = uncertainty_ellipse(&cov, confidence)?;
    Ok(EllipseOutput {
        segment: state.segment,
        s: s.value(),
        confidence,
        sigma_w,
        covariance_m2: [
            [cov.entry(0, 0), cov.entry(0, 1)],
            [cov.entry(1, 0), cov.entry(1, 1)],
        ],
        semi_axes_m: ellipse.semi_axes,
        angle_rad: ellipse.angle,
    })
}

#[derive(Debug, Serialize)]
pub struct ConditioningRow {
    pub placement: Vec<f64>,
    pub condition: f64,
    pub determinant: f64,
}

/// Compares candidate sensor arrangements, e.g.
/// `--placements "0.357,0.714,1.0;0.5,1.0"`.
pub fn run_conditioning(placements: &str) -> Result<Vec<ConditioningRow>, CliError> {
    let mut rows = Vec::new();
    for group in placements.split(';') {
        let locations: Vec<f64> = group
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::InvalidArgument(format!("{v:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        let placement = SensorPlacement::new(locations.clone())
            .map_err(|e| CliError::InvalidArgument(e.to_string()))?;
        rows.push(ConditioningRow {
            placement: locations,
            condition: placement_conditioning(&placement),
            determinant: system_determinant(&placement),
        });
    }
    if rows.is_empty() {
        return Err(CliError::InvalidArgument("no placements given".into()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditioning_rows_follow_spread() {
        let rows = run_conditioning("0.98,0.99,1.0;0.333,0.667,1.0").unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].condition > rows[1].condition * 100.0);
        assert!(rows.iter().all(|r| r.determinant > 0.0));
    }

    #[test]
    fn malformed_placement_is_rejected() {
        assert!(run_conditioning("0.5,0.5").is_err());
        assert!(run_conditioning("a,b").is_err());
    }

    #[test]
    fn unknown_scenario_is_rejected() {
        let sc = ScenarioConfig::default();
        assert!(matches!(
            trajectory_spec("wiggle", &sc),
            Err(CliError::UnknownScenario(_))
        ));
    }
}
