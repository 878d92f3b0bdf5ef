//! Recovery of the modal configuration from orientations measured at a few
//! arc locations.
//!
//! With sensors at 0 < s₀ < … < s_m ≤ 1 and measured in-plane angles
//! α(s_k), the coefficients satisfy the linear system A Θ = b with
//! A[j][k] = s_j^(k+1)/(k+1). The system matrix is a scaled Vandermonde
//! matrix with closed-form determinant (Π s_k / (m+1)!) · Π_{j<i}(s_i − s_j),
//! strictly positive for any valid placement, so the solution is unique.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::ppc::ModalConfig;

/// Condition numbers above this default flag a placement as numerically
/// unhealthy (clustered sensors).
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModalError {
    #[error("sensor locations must be finite and strictly increasing in (0, 1]: {0:?}")]
    InvalidPlacement(Vec<f64>),
    #[error("expected {expected} orientation values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("orientation value {index} is not finite")]
    NonFiniteOrientation { index: usize },
    #[error("{sensors} sensors cannot resolve {unknowns} modal coefficients")]
    Underdetermined { sensors: usize, unknowns: usize },
    #[error("system factorization failed")]
    SingularSystem,
    #[error("placement is ill-conditioned (condition number {condition:.3e}); best-effort solution attached")]
    IllConditioned {
        condition: f64,
        solution: ModalConfig,
    },
}

/// Ordered sensor arc locations, strictly increasing in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SensorPlacement {
    locations: Vec<f64>,
}

impl SensorPlacement {
    pub fn new(locations: Vec<f64>) -> Result<Self, ModalError> {
        let ok = !locations.is_empty()
            && locations.iter().all(|s| s.is_finite())
            && locations[0] > 0.0
            && *locations.last().unwrap() <= 1.0
            && locations.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(ModalError::InvalidPlacement(locations));
        }
        Ok(SensorPlacement { locations })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    /// Order that makes the system square: one coefficient per sensor.
    pub fn square_order(&self) -> usize {
        self.locations.len() - 1
    }
}

/// System matrix with rows indexed by sensor and columns by modal order:
/// A[j][k] = s_j^(k+1)/(k+1). Rectangular when sensors exceed order+1.
pub fn build_system(placement: &SensorPlacement, order: usize) -> DMatrix<f64> {
    let rows = placement.len();
    DMatrix::from_fn(rows, order + 1, |j, k| {
        let s = placement.locations[j];
        s.powi(k as i32 + 1) / (k as f64 + 1.0)
    })
}

/// Closed-form determinant of the square system matrix.
pub fn system_determinant(placement: &SensorPlacement) -> f64 {
    let s = &placement.locations;
    let m1 = s.len();
    let mut prod = 1.0;
    let mut factorial = 1.0;
    for (k, &sk) in s.iter().enumerate() {
        prod *= sk;
        factorial *= (k + 1) as f64;
    }
    let mut vandermonde = 1.0;
    for i in 1..m1 {
        for j in 0..i {
            vandermonde *= s[i] - s[j];
        }
    }
    prod / factorial * vandermonde
}

/// Two-norm condition number of the square system matrix, for comparing
/// candidate sensor arrangements before committing hardware.
pub fn placement_conditioning(placement: &SensorPlacement) -> f64 {
    condition_number(&build_system(placement, placement.square_order()))
}

fn condition_number(a: &DMatrix<f64>) -> f64 {
    let svd = a.clone().svd(false, false);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

enum Factorization {
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Svd(nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// Pre-factored solver for a fixed placement and order. The factorization
/// is computed once and can be shared read-only across threads solving
/// different timestamps.
pub struct ModalSolver {
    matrix: DMatrix<f64>,
    factorization: Factorization,
    condition: f64,
    order: usize,
    sensors: usize,
}

impl ModalSolver {
    /// Builds the solver. Requires at least `order + 1` sensors; with more,
    /// solutions are least-squares.
    pub fn new(placement: &SensorPlacement, order: usize) -> Result<Self, ModalError> {
        let sensors = placement.len();
        if sensors < order + 1 {
            return Err(ModalError::Underdetermined {
                sensors,
                unknowns: order + 1,
            });
        }
        let matrix = build_system(placement, order);
        let condition = condition_number(&matrix);
        let factorization = if sensors == order + 1 {
            Factorization::Lu(matrix.clone().lu())
        } else {
            // Least squares for redundant sensors.
            Factorization::Svd(matrix.clone().svd(true, true))
        };
        Ok(ModalSolver {
            matrix,
            factorization,
            condition,
            order,
            sensors,
        })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_least_squares(&self) -> bool {
        self.sensors > self.order + 1
    }

    /// Solves A Θ = α. One step of iterative refinement keeps the residual
    /// near machine precision for square systems.
    pub fn solve(&self, alphas: &[f64]) -> Result<ModalConfig, ModalError> {
        if alphas.len() != self.sensors {
            return Err(ModalError::LengthMismatch {
                expected: self.sensors,
                got: alphas.len(),
            });
        }
        if let Some(index) = alphas.iter().position(|a| !a.is_finite()) {
            return Err(ModalError::NonFiniteOrientation { index });
        }
        let b = DVector::from_column_slice(alphas);
        let mut theta = match &self.factorization {
            Factorization::Lu(lu) => lu.solve(&b).ok_or(ModalError::SingularSystem)?,
            Factorization::Svd(svd) => svd
                .solve(&b, 1e-14)
                .map_err(|_| ModalError::SingularSystem)?,
        };
        if let Factorization::Lu(lu) = &self.factorization {
            let residual = &b - &self.matrix * &theta;
            if let Some(correction) = lu.solve(&residual) {
                theta += correction;
            }
        }
        ModalConfig::new(theta.iter().copied().collect()).map_err(|_| ModalError::SingularSystem)
    }
}

/// One-shot square solve with the default conditioning guard. An
/// ill-conditioned placement is reported as an error that still carries the
/// best-effort solution.
pub fn solve_modal(
    placement: &SensorPlacement,
    alphas: &[f64],
) -> Result<ModalConfig, ModalError> {
    solve_modal_with_limit(placement, alphas, DEFAULT_CONDITION_LIMIT)
}

pub fn solve_modal_with_limit(
    placement: &SensorPlacement,
    alphas: &[f64],
    condition_limit: f64,
) -> Result<ModalConfig, ModalError> {
    let solver = ModalSolver::new(placement, placement.square_order())?;
    let solution = solver.solve(alphas)?;
    if solver.condition() > condition_limit {
        return Err(ModalError::IllConditioned {
            condition: solver.condition(),
            solution,
        });
    }
    Ok(solution)
}
