//! 3D embedding of planar segments and multi-segment composition.
//!
//! Frame convention: each segment's base tangent is its local +z axis. The
//! bending plane is spanned by z and u(φ) = [cos φ, sin φ, 0]; the planar
//! along-tangent coordinate x maps to local z and the planar deflection y
//! maps to u(φ), so
//!
//! ```text
//! position = [y·cos φ, y·sin φ, x],
//! orientation = rotation by α about n = [−sin φ, cos φ, 0].
//! ```
//!
//! This is the unique convention under which the straight configuration is
//! φ-invariant and extracting (α, φ) from a segment pose returns the input.

use thiserror::Error;

use crate::modal::SensorPlacement;
use crate::orientation::config_to_quaternion;
use crate::ppc::{self, ArcCoordinate, ModalConfig, PlanarPoint, PpcError};
use crate::quat::Quaternion;
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("{specs} segment specs but {states} states")]
    LengthMismatch { specs: usize, states: usize },
    #[error("segment index {index} out of range for {count} segments")]
    SegmentOutOfRange { index: usize, count: usize },
    #[error("state order {state} does not match spec order {spec} for segment {index}")]
    OrderMismatch {
        index: usize,
        spec: usize,
        state: usize,
    },
    #[error("shape sampling needs at least 2 points per segment, got {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Ppc(#[from] PpcError),
}

/// Static description of one segment: backbone length, approximation
/// order, and sensor placement.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpec {
    length: f64,
    order: usize,
    placement: SensorPlacement,
}

impl SegmentSpec {
    /// Requires a positive length and at least `order + 1` sensors.
    pub fn new(length: f64, order: usize, placement: SensorPlacement) -> Option<Self> {
        if !(length.is_finite() && length > 0.0) || placement.len() < order + 1 {
            return None;
        }
        Some(SegmentSpec {
            length,
            order,
            placement,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn placement(&self) -> &SensorPlacement {
        &self.placement
    }
}

/// Instantaneous state of one segment: modal coefficients and bending
/// direction at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentState {
    pub theta: ModalConfig,
    pub phi: f64,
    pub t: f64,
}

/// Position and orientation of a backbone point, in the robot base frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Quaternion,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        position: [0.0, 0.0, 0.0],
        orientation: Quaternion::IDENTITY,
    };

    /// Applies `self` to a pose expressed in `self`'s frame.
    pub fn compose(&self, local: &Pose) -> Pose {
        Pose {
            position: vec3::add(self.position, self.orientation.rotate(local.position)),
            orientation: (self.orientation * local.orientation).normalized(),
        }
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        vec3::add(self.position, self.orientation.rotate(p))
    }

    /// Local tangent direction (+z) expressed in the parent frame.
    pub fn tangent(&self) -> Vec3 {
        self.orientation.rotate([0.0, 0.0, 1.0])
    }
}

/// Embeds a planar solution into 3D under the frame convention.
pub(crate) fn embed_planar(point: PlanarPoint, alpha: f64, phi: f64) -> Pose {
    let (sin_phi, cos_phi) = phi.sin_cos();
    Pose {
        position: [point.y * cos_phi, point.y * sin_phi, point.x],
        orientation: config_to_quaternion(alpha, phi),
    }
}

/// Pose of a point of one segment relative to the segment base.
pub fn segment_pose(
    spec: &SegmentSpec,
    state: &SegmentState,
    s: ArcCoordinate,
) -> Result<Pose, ChainError> {
    let planar = ppc::position(&state.theta, s, spec.length)?;
    let alpha = state.theta.orientation_at(s);
    Ok(embed_planar(planar, alpha, state.phi))
}

fn check_chain(specs: &[SegmentSpec], states: &[SegmentState]) -> Result<(), ChainError> {
    if specs.len() != states.len() {
        return Err(ChainError::LengthMismatch {
            specs: specs.len(),
            states: states.len(),
        });
    }
    for (index, (spec, state)) in specs.iter().zip(states).enumerate() {
        if spec.order() != state.theta.order() {
            return Err(ChainError::OrderMismatch {
                index,
                spec: spec.order(),
                state: state.theta.order(),
            });
        }
    }
    Ok(())
}

/// Pose of a point of segment `index` in the robot base frame, composing
/// the full transforms of all preceding segments.
pub fn chain_pose(
    specs: &[SegmentSpec],
    states: &[SegmentState],
    index: usize,
    s: ArcCoordinate,
) -> Result<Pose, ChainError> {
    check_chain(specs, states)?;
    if index >= specs.len() {
        return Err(ChainError::SegmentOutOfRange {
            index,
            count: specs.len(),
        });
    }
    let mut base = Pose::IDENTITY;
    for i in 0..index {
        base = base.compose(&segment_pose(&specs[i], &states[i], ArcCoordinate::END)?);
    }
    Ok(base.compose(&segment_pose(&specs[index], &states[index], s)?))
}

/// One sampled pose of the robot shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSample {
    pub segment: usize,
    pub s: f64,
    pub pose: Pose,
}

/// Samples the whole shape on an evenly spaced grid of `points_per_segment`
/// locations per segment (including both endpoints), ordered base to tip.
pub fn sample_shape(
    specs: &[SegmentSpec],
    states: &[SegmentState],
    points_per_segment: usize,
) -> Result<Vec<ShapeSample>, ChainError> {
    check_chain(specs, states)?;
    if points_per_segment < 2 {
        return Err(ChainError::TooFewPoints(points_per_segment));
    }
    let grid: Vec<ArcCoordinate> = (0..points_per_segment)
        .map(|k| ArcCoordinate::clamped(k as f64 / (points_per_segment - 1) as f64))
        .collect();

    let mut out = Vec::with_capacity(specs.len() * points_per_segment);
    let mut base = Pose::IDENTITY;
    for (index, (spec, state)) in specs.iter().zip(states).enumerate() {
        let planar = ppc::positions_on_grid(&state.theta, spec.length, &grid)?;
        for (&s, point) in grid.iter().zip(planar) {
            let alpha = state.theta.orientation_at(s);
            let local = embed_planar(point, alpha, state.phi);
            out.push(ShapeSample {
                segment: index,
                s: s.value(),
                pose: base.compose(&local),
            });
        }
        base = base.compose(&segment_pose(spec, state, ArcCoordinate::END)?);
    }
    Ok(out)
}
