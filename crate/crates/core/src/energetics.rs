//! Velocity-field post-processing: kinetic energy density, strain-rate
//! viscous dissipation, chamber-volume averages and the dissipation to
//! kinetic energy ratio. CGS units (cm, g, s; pressure-like densities in
//! dyne/cm²).

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnergeticsError {
    #[error("axis {axis} has {size} samples; gradients need at least 3")]
    GridTooSmall { axis: usize, size: usize },
    #[error("strain rate requires a regular grid field")]
    NotAGrid,
    #[error("chamber mask is empty")]
    EmptyMask,
    #[error("mask volume {stated} disagrees with summed cell volumes {summed}")]
    InconsistentMaskVolume { stated: f64, summed: f64 },
    #[error("mask indexes sample {index} outside the field ({len} samples)")]
    MaskOutOfRange { index: usize, len: usize },
    #[error("kinetic energy below floor; dissipation/KE ratio undefined")]
    RatioUndefined,
    #[error("invalid field: {0}")]
    InvalidField(&'static str),
}

/// Velocity samples either on a regular grid (x fastest, then y, then z) or
/// scattered with explicit cell volumes.
#[derive(Debug, Clone)]
pub enum Sampling {
    Grid {
        origin: [f64; 3],
        spacing: [f64; 3],
        dims: [usize; 3],
    },
    Scattered {
        points: Vec<[f64; 3]>,
        cell_volumes: Vec<f64>,
    },
}

/// Sampled velocity field with fluid density rho [g/cm³] and dynamic
/// viscosity mu [g/(cm·s)].
#[derive(Debug, Clone)]
pub struct SampledVelocityField {
    pub sampling: Sampling,
    pub velocities: Vec<Vector3<f64>>,
    pub rho: f64,
    pub mu: f64,
}

/// Standard blood properties used when a field does not specify its own.
pub const DEFAULT_RHO: f64 = 1.06;
pub const DEFAULT_MU: f64 = 0.04;

impl SampledVelocityField {
    pub fn len(&self) -> usize {
        self.velocities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocities.is_empty()
    }

    pub fn validate(&self) -> Result<(), EnergeticsError> {
        if !(self.rho > 0.0 && self.mu > 0.0) {
            return Err(EnergeticsError::InvalidField("rho and mu must be > 0"));
        }
        match &self.sampling {
            Sampling::Grid { spacing, dims, .. } => {
                if spacing.iter().any(|&h| !(h > 0.0)) {
                    return Err(EnergeticsError::InvalidField("grid spacing must be > 0"));
                }
                let n = dims[0] * dims[1] * dims[2];
                if n != self.velocities.len() {
                    return Err(EnergeticsError::InvalidField(
                        "grid dims do not match velocity count",
                    ));
                }
            }
            Sampling::Scattered {
                points,
                cell_volumes,
            } => {
                if points.len() != self.velocities.len()
                    || cell_volumes.len() != self.velocities.len()
                {
                    return Err(EnergeticsError::InvalidField(
                        "scattered sampling arrays have mismatched lengths",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Per-sample cell volume [mL].
    pub fn cell_volume(&self, i: usize) -> f64 {
        match &self.sampling {
            Sampling::Grid { spacing, .. } => spacing[0] * spacing[1] * spacing[2],
            Sampling::Scattered { cell_volumes, .. } => cell_volumes[i],
        }
    }
}

/// Per-sample chamber membership (sample indices into the field) and the
/// instantaneous chamber volume.
#[derive(Debug, Clone)]
pub struct ChamberMask {
    pub members: Vec<usize>,
    pub volume: f64,
}

impl ChamberMask {
    /// Builds a mask from member indices, taking the volume from the field's
    /// cell volumes.
    pub fn from_members(
        field: &SampledVelocityField,
        members: Vec<usize>,
    ) -> Result<Self, EnergeticsError> {
        if members.is_empty() {
            return Err(EnergeticsError::EmptyMask);
        }
        for &i in &members {
            if i >= field.len() {
                return Err(EnergeticsError::MaskOutOfRange {
                    index: i,
                    len: field.len(),
                });
            }
        }
        let volume = pairwise_sum(&members.iter().map(|&i| field.cell_volume(i)).collect::<Vec<_>>());
        Ok(Self { members, volume })
    }

    pub fn check_against(&self, field: &SampledVelocityField) -> Result<(), EnergeticsError> {
        if self.members.is_empty() {
            return Err(EnergeticsError::EmptyMask);
        }
        let summed = pairwise_sum(
            &self
                .members
                .iter()
                .map(|&i| field.cell_volume(i))
                .collect::<Vec<_>>(),
        );
        if (summed - self.volume).abs() > 1e-9 {
            return Err(EnergeticsError::InconsistentMaskVolume {
                stated: self.volume,
                summed,
            });
        }
        Ok(())
    }
}

/// Deterministic pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Pointwise kinetic energy density e = ½ ρ ‖v‖² [dyne/cm²].
pub fn kinetic_energy_density(field: &SampledVelocityField) -> Vec<f64> {
    field
        .velocities
        .iter()
        .map(|v| 0.5 * field.rho * v.norm_squared())
        .collect()
}

/// Symmetric strain-rate tensor S = ½(∇v + ∇vᵀ) [1/s] on a regular grid:
/// central differences in the interior, one-sided second order at the
/// boundaries. Axes with a single layer contribute zero derivative.
pub fn strain_rate(field: &SampledVelocityField) -> Result<Vec<Matrix3<f64>>, EnergeticsError> {
    field.validate()?;
    let (spacing, dims) = match &field.sampling {
        Sampling::Grid { spacing, dims, .. } => (*spacing, *dims),
        Sampling::Scattered { .. } => return Err(EnergeticsError::NotAGrid),
    };
    for (axis, &n) in dims.iter().enumerate() {
        if n == 2 {
            return Err(EnergeticsError::GridTooSmall { axis, size: n });
        }
    }

    let idx = |i: usize, j: usize, k: usize| i + dims[0] * (j + dims[1] * k);
    let n_total = dims[0] * dims[1] * dims[2];
    let mut grads: Vec<Matrix3<f64>> = Vec::with_capacity(n_total);

    // derivative of component `comp` along `axis` at (i,j,k)
    let d_axis = |pos: [usize; 3], axis: usize, comp: usize| -> f64 {
        let n = dims[axis];
        if n == 1 {
            return 0.0;
        }
        let h = spacing[axis];
        let at = |c: usize| -> f64 {
            let mut p = pos;
            p[axis] = c;
            field.velocities[idx(p[0], p[1], p[2])][comp]
        };
        let c = pos[axis];
        if c == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
        } else if c == n - 1 {
            (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
        } else {
            (at(c + 1) - at(c - 1)) / (2.0 * h)
        }
    };

    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let pos = [i, j, k];
                let mut grad = Matrix3::zeros();
                for comp in 0..3 {
                    for axis in 0..3 {
                        grad[(comp, axis)] = d_axis(pos, axis, comp);
                    }
                }
                grads.push(0.5 * (grad + grad.transpose()));
            }
        }
    }
    Ok(grads)
}

/// Viscous dissipation density φ = 2 μ S:S [dyne/(cm²·s)].
pub fn dissipation_density(field: &SampledVelocityField) -> Result<Vec<f64>, EnergeticsError> {
    let s = strain_rate(field)?;
    Ok(dissipation_from_strain(field.mu, &s))
}

/// φ = 2 μ S:S given precomputed strain-rate tensors.
pub fn dissipation_from_strain(mu: f64, strain: &[Matrix3<f64>]) -> Vec<f64> {
    strain
        .iter()
        .map(|s| {
            let mut contraction = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    contraction += s[(i, j)] * s[(i, j)];
                }
            }
            2.0 * mu * contraction
        })
        .collect()
}

/// Volume-weighted chamber average of a per-sample scalar.
pub fn chamber_average(
    values: &[f64],
    mask: &ChamberMask,
    field: &SampledVelocityField,
) -> Result<f64, EnergeticsError> {
    mask.check_against(field)?;
    for &i in &mask.members {
        if i >= values.len() {
            return Err(EnergeticsError::MaskOutOfRange {
                index: i,
                len: values.len(),
            });
        }
    }
    let weighted: Vec<f64> = mask
        .members
        .iter()
        .map(|&i| values[i] * field.cell_volume(i))
        .collect();
    Ok(pairwise_sum(&weighted) / mask.volume)
}

pub const KE_FLOOR: f64 = 1e-12;

/// φ̄ / ē_KE [1/s]; undefined when the kinetic energy is below the floor.
pub fn dissipation_ke_ratio(phi_bar: f64, e_ke_bar: f64) -> Result<f64, EnergeticsError> {
    if e_ke_bar <= KE_FLOOR {
        return Err(EnergeticsError::RatioUndefined);
    }
    Ok(phi_bar / e_ke_bar)
}
