//! Error statistics between an estimated trace and a ground-truth trace.
//!
//! Shape error per frame is the RMSE of point-wise position error over the
//! sampled locations; tip error is the absolute position error of the
//! distal sample. Aggregates are mean, standard deviation and max over
//! frames, plus the bound of relative error BRE = 100·max/total length.
//! Bending-direction errors are only counted on frames where both traces
//! show a clearly defined direction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ppc_shape::orientation::{circular_distance, extract_config, DEFAULT_ALPHA_MIN};
use ppc_shape::quat::Quaternion;
use ppc_shape::vec3;

use crate::formats::{ShapeTrace, TraceFrame};

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("traces share no aligned frames (estimated {estimated:?}, truth {truth:?})")]
    MisalignedTraces {
        estimated: Option<(f64, f64)>,
        truth: Option<(f64, f64)>,
    },
    #[error("traces sample different grids at t = {t}: {reason}")]
    GridMismatch { t: f64, reason: String },
    #[error("trace is empty")]
    EmptyTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mean: f64,
    pub sd: f64,
    pub max: f64,
}

impl ErrorStats {
    fn from_samples(samples: &[f64]) -> Option<ErrorStats> {
        if samples.is_empty() {
            return None;
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some(ErrorStats {
            mean,
            sd: var.sqrt(),
            max,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionErrorStats {
    pub mean_m: f64,
    pub sd_m: f64,
    pub max_m: f64,
    pub bre_percent: f64,
}

/// Table-style error report. Positions in meters; bending direction in
/// degrees (spatial scenarios only, null when never defined).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub total_length_m: f64,
    pub frames_evaluated: usize,
    pub frames_skipped: usize,
    pub shape: PositionErrorStats,
    pub tip: PositionErrorStats,
    pub bending_direction_deg: Option<ErrorStats>,
}

/// Per-frame error record, written as CSV for plotting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameErrors {
    pub t: f64,
    pub shape_rmse_m: f64,
    pub tip_error_m: f64,
    pub direction_error_deg: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct EvaluateOptions {
    /// Evaluation starts this many seconds after the first aligned frame
    /// (filter warm-up exclusion).
    pub skip_initial: f64,
    /// When set, every frame must carry exactly this many samples.
    pub expected_points: Option<usize>,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        EvaluateOptions {
            skip_initial: 0.0,
            expected_points: None,
        }
    }
}

/// Backbone length from a sampled shape: polyline length of the frame.
fn polyline_length(frame: &TraceFrame) -> f64 {
    frame
        .rows
        .windows(2)
        .map(|w| {
            if w[1].segment == w[0].segment || w[1].s > 0.0 {
                vec3::norm(vec3::sub(w[1].position, w[0].position))
            } else {
                0.0
            }
        })
        .sum()
}

/// Bending direction of each segment implied by a frame's orientations:
/// the tip orientation of a segment rebased on the previous segment's tip.
fn segment_directions(frame: &TraceFrame) -> Vec<Option<f64>> {
    let mut out = Vec::new();
    let mut prev_tip = Quaternion::IDENTITY;
    let segments: Vec<usize> = {
        let mut seen = Vec::new();
        for row in &frame.rows {
            if seen.last() != Some(&row.segment) {
                seen.push(row.segment);
            }
        }
        seen
    };
    for segment in segments {
        let tip = frame
            .rows
            .iter()
            .rev()
            .find(|r| r.segment == segment)
            .map(|r| r.orientation)
            .unwrap_or(Quaternion::IDENTITY);
        let local = (prev_tip.conjugate() * tip).normalized();
        let phi = extract_config(&local, DEFAULT_ALPHA_MIN)
            .ok()
            .and_then(|e| e.config.phi_defined.then_some(e.config.phi));
        out.push(phi);
        prev_tip = tip;
    }
    out
}

/// Compares two traces aligned by nearest timestamp within half a truth
/// sample period.
pub fn evaluate(
    estimated: &ShapeTrace,
    truth: &ShapeTrace,
    options: &EvaluateOptions,
) -> Result<(ErrorReport, Vec<FrameErrors>), EvaluateError> {
    if estimated.frames.is_empty() || truth.frames.is_empty() {
        return Err(EvaluateError::EmptyTrace);
    }
    let est_times: Vec<f64> = estimated.frames.iter().map(|f| f.t).collect();
    let mut dts: Vec<f64> = truth.frames.windows(2).map(|w| w[1].t - w[0].t).collect();
    dts.sort_by(f64::total_cmp);
    let half_period = if dts.is_empty() {
        f64::INFINITY
    } else {
        0.5 * dts[dts.len() / 2]
    };

    let mut pairs = Vec::new();
    let mut skipped = 0usize;
    for truth_frame in &truth.frames {
        let idx = est_times.partition_point(|&x| x < truth_frame.t);
        let mut best: Option<usize> = None;
        for candidate in [idx.checked_sub(1), Some(idx)].into_iter().flatten() {
            if candidate >= est_times.len() {
                continue;
            }
            if (est_times[candidate] - truth_frame.t).abs() <= half_period {
                best = match best {
                    Some(b)
                        if (est_times[b] - truth_frame.t).abs()
                            <= (est_times[candidate] - truth_frame.t).abs() =>
                    {
                        Some(b)
                    }
                    _ => Some(candidate),
                };
            }
        }
        match best {
            Some(i) => pairs.push((&estimated.frames[i], truth_frame)),
            None => skipped += 1,
        }
    }
    if pairs.is_empty() {
        let span = |t: &ShapeTrace| {
            t.frames
                .first()
                .map(|f| (f.t, t.frames.last().unwrap().t))
        };
        return Err(EvaluateError::MisalignedTraces {
            estimated: span(estimated),
            truth: span(truth),
        });
    }

    let t_start = pairs[0].1.t + options.skip_initial;
    let total_length = polyline_length(pairs[0].1);

    let mut frame_errors = Vec::new();
    let mut shape_samples = Vec::new();
    let mut tip_samples = Vec::new();
    let mut direction_samples = Vec::new();
    for (est, tru) in &pairs {
        if tru.t < t_start {
            skipped += 1;
            continue;
        }
        if est.rows.len() != tru.rows.len() {
            return Err(EvaluateError::GridMismatch {
                t: tru.t,
                reason: format!("{} vs {} samples", est.rows.len(), tru.rows.len()),
            });
        }
        if let Some(expected) = options.expected_points {
            let segments = tru.rows.iter().map(|r| r.segment).max().unwrap_or(0) + 1;
            if tru.rows.len() != expected * segments {
                return Err(EvaluateError::GridMismatch {
                    t: tru.t,
                    reason: format!(
                        "expected {expected} points per segment, found {} rows over {segments} segments",
                        tru.rows.len()
                    ),
                });
            }
        }
        let mut sum_sq = 0.0;
        for (a, b) in est.rows.iter().zip(&tru.rows) {
            if a.segment != b.segment || (a.s - b.s).abs() > 1e-9 {
                return Err(EvaluateError::GridMismatch {
                    t: tru.t,
                    reason: format!(
                        "sample ({}, {}) vs ({}, {})",
                        a.segment, a.s, b.segment, b.s
                    ),
                });
            }
            let d = vec3::norm(vec3::sub(a.position, b.position));
            sum_sq += d * d;
        }
        let shape_rmse = (sum_sq / est.rows.len() as f64).sqrt();
        let tip_error = vec3::norm(vec3::sub(
            est.rows.last().unwrap().position,
            tru.rows.last().unwrap().position,
        ));

        let est_dirs = segment_directions(est);
        let tru_dirs = segment_directions(tru);
        let mut dir_errors = Vec::new();
        for (a, b) in est_dirs.iter().zip(&tru_dirs) {
            if let (Some(a), Some(b)) = (a, b) {
                dir_errors.push(circular_distance(*a, *b).to_degrees());
            }
        }
        let direction_error = if dir_errors.is_empty() {
            None
        } else {
            Some(dir_errors.iter().sum::<f64>() / dir_errors.len() as f64)
        };

        shape_samples.push(shape_rmse);
        tip_samples.push(tip_error);
        if let Some(d) = direction_error {
            direction_samples.push(d);
        }
        frame_errors.push(FrameErrors {
            t: tru.t,
            shape_rmse_m: shape_rmse,
            tip_error_m: tip_error,
            direction_error_deg: direction_error,
        });
    }
    if frame_errors.is_empty() {
        return Err(EvaluateError::MisalignedTraces {
            estimated: None,
            truth: None,
        });
    }

    let to_position_stats = |stats: ErrorStats| PositionErrorStats {
        mean_m: stats.mean,
        sd_m: stats.sd,
        max_m: stats.max,
        bre_percent: 100.0 * stats.max / total_length,
    };
    let shape = to_position_stats(ErrorStats::from_samples(&shape_samples).unwrap());
    let tip = to_position_stats(ErrorStats::from_samples(&tip_samples).unwrap());

    Ok((
        ErrorReport {
            scenario: None,
            total_length_m: total_length,
            frames_evaluated: frame_errors.len(),
            frames_skipped: skipped,
            shape,
            tip,
            bending_direction_deg: ErrorStats::from_samples(&direction_samples),
        },
        frame_errors,
    ))
}

/// Writes the per-frame error CSV next to the JSON report.
pub fn write_frame_errors_csv(
    path: &std::path::Path,
    errors: &[FrameErrors],
) -> Result<(), crate::formats::FormatError> {
    use std::io::Write;
    let file = std::fs::File::create(path).map_err(|e| crate::formats::FormatError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut out = std::io::BufWriter::new(file);
    let emit = |out: &mut std::io::BufWriter<std::fs::File>, line: String| {
        out.write_all(line.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| crate::formats::FormatError::Io {
                path: path.display().to_string(),
                source: e,
            })
    };
    emit(&mut out, "t,shape_rmse_m,tip_error_m,direction_error_deg".into())?;
    for e in errors {
        let dir = e
            .direction_error_deg
            .map(|d| d.to_string())
            .unwrap_or_default();
        emit(
            &mut out,
            format!("{},{},{},{}", e.t, e.shape_rmse_m, e.tip_error_m, dir),
        )?;
    }
    out.flush().map_err(|e| crate::formats::FormatError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::TraceRow;

    fn straight_frame(t: f64, offset: f64) -> TraceFrame {
        TraceFrame {
            t,
            rows: (0..5)
                .map(|k| TraceRow {
                    segment: 0,
                    s: k as f64 / 4.0,
                    position: [offset, 0.0, 0.12 * k as f64],
                    orientation: Quaternion::IDENTITY,
                })
                .collect(),
        }
    }

    fn trace(frames: Vec<TraceFrame>) -> ShapeTrace {
        ShapeTrace { frames }
    }

    #[test]
    fn identical_traces_are_zero_error() {
        let t = trace((0..10).map(|k| straight_frame(k as f64 / 60.0, 0.0)).collect());
        let (report, _) = evaluate(&t, &t, &EvaluateOptions::default()).unwrap();
        assert_eq!(report.shape.mean_m, 0.0);
        assert_eq!(report.tip.max_m, 0.0);
        assert_eq!(report.frames_evaluated, 10);
        assert!(report.bending_direction_deg.is_none());
    }

    #[test]
    fn constant_offset_statistics() {
        // 3 mm offset on every point of a 0.48 m robot: mean 3 mm, sd 0,
        // BRE = 100·0.003/0.48 = 0.625 %.
        let truth = trace((0..20).map(|k| straight_frame(k as f64 / 60.0, 0.0)).collect());
        let est = trace((0..20).map(|k| straight_frame(k as f64 / 60.0, 0.003)).collect());
        let (report, frames) = evaluate(&est, &truth, &EvaluateOptions::default()).unwrap();
        assert!((report.shape.mean_m - 0.003).abs() < 1e-15);
        assert!(report.shape.sd_m.abs() < 1e-15);
        assert!((report.shape.bre_percent - 0.625).abs() < 1e-9);
        assert!((report.tip.mean_m - 0.003).abs() < 1e-15);
        assert_eq!(frames.len(), 20);
    }

    #[test]
    fn disjoint_time_ranges_error() {
        let a = trace((0..5).map(|k| straight_frame(k as f64 / 60.0, 0.0)).collect());
        let b = trace((600..605).map(|k| straight_frame(k as f64 / 60.0, 0.0)).collect());
        assert!(matches!(
            evaluate(&a, &b, &EvaluateOptions::default()),
            Err(EvaluateError::MisalignedTraces { .. })
        ));
    }

    #[test]
    fn grid_mismatch_is_detected() {
        let truth = trace(vec![straight_frame(0.0, 0.0)]);
        let mut est = truth.clone();
        est.frames[0].rows[2].s += 0.01;
        assert!(matches!(
            evaluate(&est, &truth, &EvaluateOptions::default()),
            Err(EvaluateError::GridMismatch { .. })
        ));
    }

    #[test]
    fn direction_error_from_bent_frames() {
        use ppc_shape::orientation::config_to_quaternion;
        let bent = |phi: f64| TraceFrame {
            t: 0.0,
            rows: (0..3)
                .map(|k| TraceRow {
                    segment: 0,
                    s: k as f64 / 2.0,
                    position: [0.0, 0.0, 0.1 * k as f64],
                    orientation: config_to_quaternion(0.9 * k as f64 / 2.0, phi),
                })
                .collect(),
        };
        let truth = trace(vec![bent(1.0)]);
        let est = trace(vec![bent(1.0 + 0.05)]);
        let (report, _) = evaluate(&est, &truth, &EvaluateOptions::default()).unwrap();
        let dir = report.bending_direction_deg.unwrap();
        assert!((dir.mean - 0.05f64.to_degrees()).abs() < 1e-9);
    }

    #[test]
    fn report_serializes_with_table_columns() {
        let t = trace((0..5).map(|k| straight_frame(k as f64 / 60.0, 0.0)).collect());
        let (report, _) = evaluate(&t, &t, &EvaluateOptions::default()).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for section in ["shape", "tip"] {
            for column in ["mean_m", "sd_m", "max_m", "bre_percent"] {
                assert!(
                    json[section][column].is_number(),
                    "missing {section}.{column}"
                );
            }
        }
        assert!(json["bending_direction_deg"].is_null());
        assert!(json["total_length_m"].is_number());
    }

    #[test]
    fn skip_initial_window() {
        let truth = trace((0..120).map(|k| straight_frame(k as f64 / 60.0, 0.0)).collect());
        let est = truth.clone();
        let (report, _) = evaluate(
            &est,
            &truth,
            &EvaluateOptions {
                skip_initial: 1.0,
                expected_points: None,
            },
        )
        .unwrap();
        assert!(report.frames_evaluated < 120);
        assert!(report.frames_evaluated >= 59);
    }
}
