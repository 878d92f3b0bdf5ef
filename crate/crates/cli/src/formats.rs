//! File formats: JSON Lines sensor streams, CSV shape traces, JSON reports.
//!
//! All numeric fields are written with Rust's shortest round-trip float
//! formatting, so write-then-read is lossless.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ppc_shape::filter::ImuSample;
use ppc_shape::quat::Quaternion;
use ppc_shape::sim::{OrientationSample, SensorChannel};

pub const TRACE_HEADER: &str = "t,segment,s,px,py,pz,qw,qx,qy,qz";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: String,
        line: usize,
        reason: String,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> FormatError {
    FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// One quaternion stream record: {"t":…, "sensor_id":…, "q":[w,x,y,z]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuatRecord {
    pub t: f64,
    pub sensor_id: usize,
    pub q: [f64; 4],
}

/// One raw-IMU record: gyro rad/s, accel m/s², optional unit magnetometer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImuRecord {
    pub t: f64,
    pub sensor_id: usize,
    pub gyro: [f64; 3],
    pub accel: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mag: Option<[f64; 3]>,
}

/// A time-sorted quaternion series for one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct QuatStream {
    pub sensor_id: usize,
    pub samples: Vec<(f64, Quaternion)>,
}

/// A time-sorted raw-IMU series for one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ImuStream {
    pub sensor_id: usize,
    pub samples: Vec<ImuSample>,
}

/// Writes quaternion channels interleaved in time order.
pub fn write_quaternion_streams(
    path: &Path,
    channels: &[SensorChannel<OrientationSample>],
) -> Result<(), FormatError> {
    let mut records: Vec<QuatRecord> = channels
        .iter()
        .flat_map(|c| {
            c.samples.iter().map(|s| QuatRecord {
                t: s.t,
                sensor_id: s.sensor_id,
                q: [s.q.w, s.q.x, s.q.y, s.q.z],
            })
        })
        .collect();
    records.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.sensor_id.cmp(&b.sensor_id)));
    write_jsonl(path, &records)
}

/// Writes raw-IMU channels interleaved in time order.
pub fn write_imu_streams(
    path: &Path,
    channels: &[SensorChannel<ImuSample>],
) -> Result<(), FormatError> {
    let mut records = Vec::new();
    for channel in channels {
        for s in &channel.samples {
            records.push(ImuRecord {
                t: s.t,
                sensor_id: channel.sensor_id,
                gyro: s.gyro,
                accel: s.accel,
                mag: s.mag,
            });
        }
    }
    records.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.sensor_id.cmp(&b.sensor_id)));
    write_jsonl(path, &records)
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), FormatError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record).expect("serializable record");
        writeln!(out, "{line}").map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, FormatError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut records = Vec::new();
    for (number, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| FormatError::Malformed {
            path: path.display().to_string(),
            line: number + 1,
            reason: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Reads a quaternion stream file and groups it per sensor, time-sorted.
pub fn read_quaternion_streams(path: &Path) -> Result<Vec<QuatStream>, FormatError> {
    let records: Vec<QuatRecord> = read_jsonl(path)?;
    let mut by_sensor = std::collections::BTreeMap::<usize, Vec<(f64, Quaternion)>>::new();
    for r in records {
        by_sensor.entry(r.sensor_id).or_default().push((
            r.t,
            Quaternion::new(r.q[0], r.q[1], r.q[2], r.q[3]),
        ));
    }
    Ok(by_sensor
        .into_iter()
        .map(|(sensor_id, mut samples)| {
            samples.sort_by(|a, b| a.0.total_cmp(&b.0));
            QuatStream { sensor_id, samples }
        })
        .collect())
}

/// Reads a raw-IMU stream file and groups it per sensor, time-sorted.
pub fn read_imu_streams(path: &Path) -> Result<Vec<ImuStream>, FormatError> {
    let records: Vec<ImuRecord> = read_jsonl(path)?;
    let mut by_sensor = std::collections::BTreeMap::<usize, Vec<ImuSample>>::new();
    for r in records {
        by_sensor.entry(r.sensor_id).or_default().push(ImuSample {
            t: r.t,
            gyro: r.gyro,
            accel: r.accel,
            mag: r.mag,
        });
    }
    Ok(by_sensor
        .into_iter()
        .map(|(sensor_id, mut samples)| {
            samples.sort_by(|a, b| a.t.total_cmp(&b.t));
            ImuStream { sensor_id, samples }
        })
        .collect())
}

/// One row of a shape trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub segment: usize,
    pub s: f64,
    pub position: [f64; 3],
    pub orientation: Quaternion,
}

/// All rows of one timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFrame {
    pub t: f64,
    pub rows: Vec<TraceRow>,
}

/// A time-ordered sequence of sampled shapes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShapeTrace {
    pub frames: Vec<TraceFrame>,
}

pub fn write_trace_csv(path: &Path, trace: &ShapeTrace) -> Result<(), FormatError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{TRACE_HEADER}").map_err(|e| io_err(path, e))?;
    for frame in &trace.frames {
        for row in &frame.rows {
            let p = row.position;
            let q = row.orientation;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                frame.t, row.segment, row.s, p[0], p[1], p[2], q.w, q.x, q.y, q.z
            )
            .map_err(|e| io_err(path, e))?;
        }
    }
    out.flush().map_err(|e| io_err(path, e))
}

pub fn read_trace_csv(path: &Path) -> Result<ShapeTrace, FormatError> {
    let malformed = |line: usize, reason: String| FormatError::Malformed {
        path: path.display().to_string(),
        line,
        reason,
    };
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == TRACE_HEADER => {}
        Some((_, header)) => {
            return Err(malformed(1, format!("unexpected header {header:?}")));
        }
        None => return Err(malformed(1, "empty trace".into())),
    }

    let mut trace = ShapeTrace::default();
    for (number, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(malformed(number + 1, format!("{} fields", fields.len())));
        }
        let parse = |i: usize| -> Result<f64, FormatError> {
            fields[i]
                .parse::<f64>()
                .map_err(|e| malformed(number + 1, format!("field {i}: {e}")))
        };
        let t = parse(0)?;
        let segment: usize = fields[1]
            .parse()
            .map_err(|e| malformed(number + 1, format!("segment: {e}")))?;
        let row = TraceRow {
            segment,
            s: parse(2)?,
            position: [parse(3)?, parse(4)?, parse(5)?],
            orientation: Quaternion::new(parse(6)?, parse(7)?, parse(8)?, parse(9)?),
        };
        match trace.frames.last_mut() {
            Some(frame) if frame.t == t => frame.rows.push(row),
            _ => trace.frames.push(TraceFrame {
                t,
                rows: vec![row],
            }),
        }
    }
    Ok(trace)
}

pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let text = serde_json::to_string_pretty(value).expect("serializable value");
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}
