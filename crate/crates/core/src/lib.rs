//! Shape sensing for continuum robots from sparse orientation measurements.
//!
//! A continuum robot is modelled as a chain of inextensible segments whose
//! curvature is polynomial in the normalised arc length (the piecewise
//! polynomial curvature model). Orientation sensors at a handful of
//! locations determine each segment's modal coefficients through a small
//! linear system, and from those the full pose of every backbone point
//! follows in closed form or by quadrature.
//!
//! Module map:
//!
//! - [`ppc`] — planar segment math: curvature, tangent angle, positions.
//! - [`modal`] — recovery of modal coefficients from measured angles.
//! - [`quat`] / [`orientation`] — quaternion algebra and the (α, φ) bend
//!   parameterisation.
//! - [`filter`] — complementary attitude filter for raw inertial streams.
//! - [`chain`] — 3D embedding and multi-segment composition.
//! - [`uncertainty`] — first-order propagation of sensor noise to position.
//! - [`sim`] — ground-truth trajectory and synthetic sensor generation.
//! - [`special`] / [`quadrature`] — Fresnel integrals, erf, adaptive Gauss
//!   quadrature.

pub mod chain;
pub mod filter;
pub mod modal;
pub mod orientation;
pub mod ppc;
pub mod quadrature;
pub mod quat;
pub mod sim;
pub mod special;
pub mod uncertainty;
pub mod vec3;

pub use chain::{Pose, SegmentSpec, SegmentState, ShapeSample};
pub use modal::{ModalSolver, SensorPlacement};
pub use orientation::{BendConfig, BendExtraction};
pub use ppc::{ArcCoordinate, ModalConfig, PlanarPoint};
pub use quat::Quaternion;
