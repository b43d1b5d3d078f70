//! Penalty-based point-pair contact: signed penetration distance, the
//! piecewise penalty map and equal-and-opposite force assembly.

use nalgebra::{Point3, Vector3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContactError {
    #[error("invalid contact config: {0}")]
    InvalidConfig(&'static str),
    #[error("pair {index}: normal is not unit length (|n| = {norm})")]
    NonUnitNormal { index: usize, norm: f64 },
}

/// Penalty stiffness k > 0 [force/length] and admissible gap h ≥ 0 [cm].
#[derive(Debug, Clone, Copy)]
pub struct ContactConfig {
    pub stiffness: f64,
    pub gap: f64,
}

impl ContactConfig {
    pub fn validate(&self) -> Result<(), ContactError> {
        if !(self.stiffness.is_finite() && self.stiffness > 0.0) {
            return Err(ContactError::InvalidConfig("stiffness must be > 0"));
        }
        if !(self.gap.is_finite() && self.gap >= 0.0) {
            return Err(ContactError::InvalidConfig("gap must be >= 0"));
        }
        Ok(())
    }
}

/// Candidate point on one surface, its closest-point projection on the
/// opposing surface with outward unit normal, and a quadrature weight.
#[derive(Debug, Clone, Copy)]
pub struct ContactPointPair {
    pub x1: Point3<f64>,
    pub x2: Point3<f64>,
    pub n2: Vector3<f64>,
    pub weight: f64,
}

/// Signed penetration distance d = (x2 - x1)·n2; d > 0 is interpenetration.
pub fn penetration(pair: &ContactPointPair) -> f64 {
    (pair.x2 - pair.x1).dot(&pair.n2)
}

/// Piecewise penalty magnitude:
///
/// ```text
/// P(d) = 0                 d <= -h
///        k (d+h)^2 / (2h)  -h < d < 0
///        k h / 2 + k d     d >= 0
/// ```
///
/// For h = 0 the quadratic branch is empty and the map is k·d for d ≥ 0,
/// zero otherwise.
pub fn penalty_magnitude(d: f64, cfg: &ContactConfig) -> f64 {
    let (k, h) = (cfg.stiffness, cfg.gap);
    if d >= 0.0 {
        k * h / 2.0 + k * d
    } else if h > 0.0 && d > -h {
        k * (d + h) * (d + h) / (2.0 * h)
    } else {
        0.0
    }
}

/// Equal and opposite force pair: f1 = -w P(d) n2, f2 = -f1.
pub fn contact_force_pair(
    pair: &ContactPointPair,
    cfg: &ContactConfig,
) -> (Vector3<f64>, Vector3<f64>) {
    let d = penetration(pair);
    let f1 = -pair.weight * penalty_magnitude(d, cfg) * pair.n2;
    (f1, -f1)
}

/// Forces for a whole pair set, validating normals.
pub fn contact_forces(
    pairs: &[ContactPointPair],
    cfg: &ContactConfig,
) -> Result<Vec<(Vector3<f64>, Vector3<f64>)>, ContactError> {
    cfg.validate()?;
    for (i, p) in pairs.iter().enumerate() {
        let norm = p.n2.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(ContactError::NonUnitNormal { index: i, norm });
        }
    }
    Ok(pairs.iter().map(|p| contact_force_pair(p, cfg)).collect())
}
