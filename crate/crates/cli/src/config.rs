//! Robot configuration file (JSON) and its validated in-memory form.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ppc_shape::filter::FilterGains;
use ppc_shape::modal::SensorPlacement;
use ppc_shape::quat::Quaternion;
use ppc_shape::SegmentSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("config invalid: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobotConfig {
    pub segments: Vec<SegmentConfig>,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub scenario: ScenarioConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub length_m: f64,
    pub order: usize,
    pub sensor_locations: Vec<f64>,
    /// Stream ids carried by this segment's sensors, in location order.
    /// Defaults to sequential global numbering; lets an estimation config
    /// select a subset of a richer recorded stream.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensor_stream_ids: Option<Vec<usize>>,
    /// Mounting rotation per sensor as [w, x, y, z], mapping sensor-frame
    /// vectors into the local backbone frame. Identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensor_extrinsics: Option<Vec<[f64; 4]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub conditioning_threshold: f64,
    pub alpha_min_deg: f64,
    pub twist_tol: f64,
    pub least_squares: bool,
    pub hold_last_phi: bool,
    pub slerp_align: bool,
    pub points_per_segment: usize,
    pub phi_disagreement_warn_deg: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            conditioning_threshold: 1e8,
            alpha_min_deg: 0.5,
            twist_tol: ppc_shape::orientation::DEFAULT_TWIST_TOL,
            least_squares: false,
            hold_last_phi: true,
            slerp_align: false,
            points_per_segment: 50,
            phi_disagreement_warn_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub kp: f64,
    pub ki: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        let gains = FilterGains::default();
        FilterConfig {
            kp: gains.kp,
            ki: gains.ki,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Orientation sensor noise, angular standard deviation in degrees.
    pub orientation_deg: f64,
    /// Gyro white noise in deg/s (raw IMU synthesis).
    pub gyro_dps: f64,
    /// Accelerometer white noise in m/s².
    pub accel_sigma: f64,
    /// Magnetometer white noise, fraction of the unit field.
    pub mag_sigma: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            orientation_deg: 0.5,
            gyro_dps: 0.5,
            accel_sigma: 0.05,
            mag_sigma: 0.02,
        }
    }
}

/// Scenario parameters shared by all trajectory kinds; each kind reads the
/// fields it needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub duration_s: f64,
    pub rate_hz: f64,
    pub amplitude: f64,
    pub ratio: f64,
    pub frequency_hz: f64,
    pub damping_ratio: f64,
    pub phi_deg: f64,
    pub base: [f64; 2],
    pub tip_shift: [f64; 2],
    pub bump_gain: f64,
    pub bump_width: f64,
    pub bend: [f64; 2],
    pub sweep_hz: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            duration_s: 10.0,
            rate_hz: 60.0,
            amplitude: 1.0,
            ratio: 0.4,
            frequency_hz: 0.25,
            damping_ratio: 0.05,
            phi_deg: 0.0,
            base: [1.0, 0.4],
            tip_shift: [0.3, -0.6],
            bump_gain: 1.2,
            bump_width: 0.1,
            bend: [1.0, 0.4],
            sweep_hz: 0.1,
        }
    }
}

/// One flattened sensor: stream id, owning segment, slot within the
/// segment, arc location, and mounting extrinsic.
#[derive(Debug, Clone)]
pub struct SensorBinding {
    pub stream_id: usize,
    pub segment: usize,
    pub slot: usize,
    pub location: f64,
    pub extrinsic: Quaternion,
    /// Relative weight for bending-direction averaging (inverse variance).
    pub weight: f64,
}

/// Estimator settings with angles converted to radians.
#[derive(Debug, Clone)]
pub struct EstimatorSettings {
    pub conditioning_threshold: f64,
    pub alpha_min: f64,
    pub twist_tol: f64,
    pub least_squares: bool,
    pub hold_last_phi: bool,
    pub slerp_align: bool,
    pub points_per_segment: usize,
    pub phi_disagreement_warn: f64,
}

/// Config after validation, holding core-domain types.
#[derive(Debug, Clone)]
pub struct ValidatedRobot {
    pub segments: Vec<SegmentSpec>,
    pub bindings: Vec<SensorBinding>,
    pub estimator: EstimatorSettings,
    pub filter_gains: FilterGains,
    pub noise: NoiseConfig,
    pub scenario: ScenarioConfig,
}

impl ValidatedRobot {
    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length()).sum()
    }

    pub fn placements(&self) -> Vec<SensorPlacement> {
        self.segments
            .iter()
            .map(|s| s.placement().clone())
            .collect()
    }

    pub fn bindings_for_segment(&self, segment: usize) -> Vec<&SensorBinding> {
        self.bindings
            .iter()
            .filter(|b| b.segment == segment)
            .collect()
    }
}

impl RobotConfig {
    pub fn load(path: &Path) -> Result<RobotConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    /// Checks all invariants and converts to core types. Sensor counts must
    /// equal order + 1 unless least-squares mode admits extras.
    pub fn validate(&self) -> Result<ValidatedRobot, ConfigError> {
        if self.segments.is_empty() {
            return Err(ConfigError::Invalid("at least one segment required".into()));
        }
        let mut segments = Vec::new();
        let mut bindings = Vec::new();
        let mut next_id = 0usize;
        for (index, seg) in self.segments.iter().enumerate() {
            let placement = SensorPlacement::new(seg.sensor_locations.clone()).map_err(|e| {
                ConfigError::Invalid(format!("segment {index} sensor locations: {e}"))
            })?;
            let required = seg.order + 1;
            if placement.len() < required
                || (!self.estimator.least_squares && placement.len() != required)
            {
                return Err(ConfigError::Invalid(format!(
                    "segment {index}: {} sensors cannot drive an order-{} fit{}",
                    placement.len(),
                    seg.order,
                    if self.estimator.least_squares {
                        ""
                    } else {
                        " (enable least_squares for redundant sensors)"
                    },
                )));
            }
            let spec = SegmentSpec::new(seg.length_m, seg.order, placement.clone())
                .ok_or_else(|| {
                    ConfigError::Invalid(format!(
                        "segment {index}: length must be positive, got {}",
                        seg.length_m
                    ))
                })?;

            let ids: Vec<usize> = match &seg.sensor_stream_ids {
                Some(ids) => {
                    if ids.len() != placement.len() {
                        return Err(ConfigError::Invalid(format!(
                            "segment {index}: {} stream ids for {} sensors",
                            ids.len(),
                            placement.len()
                        )));
                    }
                    ids.clone()
                }
                None => (next_id..next_id + placement.len()).collect(),
            };
            let extrinsics: Vec<Quaternion> = match &seg.sensor_extrinsics {
                Some(list) => {
                    if list.len() != placement.len() {
                        return Err(ConfigError::Invalid(format!(
                            "segment {index}: {} extrinsics for {} sensors",
                            list.len(),
                            placement.len()
                        )));
                    }
                    list.iter()
                        .map(|q| {
                            let q = Quaternion::new(q[0], q[1], q[2], q[3]);
                            if q.norm() < 1e-6 {
                                Err(ConfigError::Invalid(format!(
                                    "segment {index}: zero extrinsic quaternion"
                                )))
                            } else {
                                Ok(q.normalized())
                            }
                        })
                        .collect::<Result<_, _>>()?
                }
                None => vec![Quaternion::IDENTITY; placement.len()],
            };

            for (slot, (&location, (&stream_id, extrinsic))) in placement
                .locations()
                .iter()
                .zip(ids.iter().zip(extrinsics))
                .enumerate()
            {
                bindings.push(SensorBinding {
                    stream_id,
                    segment: index,
                    slot,
                    location,
                    extrinsic,
                    weight: 1.0,
                });
            }
            next_id += placement.len();
            segments.push(spec);
        }

        let mut seen = std::collections::HashSet::new();
        for b in &bindings {
            if !seen.insert(b.stream_id) {
                return Err(ConfigError::Invalid(format!(
                    "stream id {} bound twice",
                    b.stream_id
                )));
            }
        }

        let e = &self.estimator;
        if e.points_per_segment < 2 {
            return Err(ConfigError::Invalid(
                "points_per_segment must be at least 2".into(),
            ));
        }
        Ok(ValidatedRobot {
            segments,
            bindings,
            estimator: EstimatorSettings {
                conditioning_threshold: e.conditioning_threshold,
                alpha_min: e.alpha_min_deg.to_radians(),
                twist_tol: e.twist_tol,
                least_squares: e.least_squares,
                hold_last_phi: e.hold_last_phi,
                slerp_align: e.slerp_align,
                points_per_segment: e.points_per_segment,
                phi_disagreement_warn: e.phi_disagreement_warn_deg.to_radians(),
            },
            filter_gains: FilterGains {
                kp: self.filter.kp,
                ki: self.filter.ki,
            },
            noise: self.noise.clone(),
            scenario: self.scenario.clone(),
        })
    }
}
