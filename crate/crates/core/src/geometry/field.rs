//! Scalar fields sampled at points: smoothed Dirac delta localization,
//! resistive-surface force density and upstream/downstream region
//! classification for valve fields.

use nalgebra::{Point3, Vector3};

/// Sampled scalar field (signed distance [cm] or delta density [1/cm]) with
/// the localization half-width `epsilon` it was built for. The `(mesh_id,
/// valve state)` pair is the cache key under the recompute-on-status-change
/// policy.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub points: Vec<Point3<f64>>,
    pub values: Vec<f64>,
    pub epsilon: f64,
    /// False when the source mesh was open and only unsigned distances are
    /// available.
    pub signed: bool,
    pub mesh_id: Option<String>,
}

/// Compactly supported cosine kernel of unit integral:
/// (1 + cos(πφ/ε)) / (2ε) for |φ| ≤ ε, zero outside.
pub fn smoothed_delta(phi: f64, epsilon: f64) -> f64 {
    assert!(epsilon > 0.0, "smoothed_delta requires epsilon > 0");
    if phi.abs() <= epsilon {
        (1.0 + (std::f64::consts::PI * phi / epsilon).cos()) / (2.0 * epsilon)
    } else {
        0.0
    }
}

/// Volumetric resistance force density (r_k/ε) δ(φ) u_rel, where u_rel is
/// the fluid velocity relative to the moving domain.
pub fn ris_force_density(
    phi: f64,
    epsilon: f64,
    r_k: f64,
    u_rel: &Vector3<f64>,
) -> Vector3<f64> {
    (r_k / epsilon) * smoothed_delta(phi, epsilon) * u_rel
}

/// Classification of a sample relative to a valve distance field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    /// φ > 2.5ε
    Upstream,
    /// φ < -2.5ε
    Downstream,
    /// |φ| ≤ ε
    Band,
    Far,
}

impl RegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::Upstream => "upstream",
            RegionLabel::Downstream => "downstream",
            RegionLabel::Band => "band",
            RegionLabel::Far => "far",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegionClassification {
    pub labels: Vec<RegionLabel>,
    /// φ < -ε: the region enclosed by the valve surface, used for backflow
    /// averaging.
    pub backflow_mask: Vec<bool>,
}

pub fn classify_value(phi: f64, epsilon: f64) -> RegionLabel {
    if phi > 2.5 * epsilon {
        RegionLabel::Upstream
    } else if phi < -2.5 * epsilon {
        RegionLabel::Downstream
    } else if phi.abs() <= epsilon {
        RegionLabel::Band
    } else {
        RegionLabel::Far
    }
}

/// Labels every sample of a valve distance field and provides the interior
/// (backflow) mask.
pub fn classify_regions(field: &ScalarField) -> RegionClassification {
    let eps = field.epsilon;
    let labels = field
        .values
        .iter()
        .map(|&phi| classify_value(phi, eps))
        .collect();
    let backflow_mask = field.values.iter().map(|&phi| phi < -eps).collect();
    RegionClassification {
        labels,
        backflow_mask,
    }
}
