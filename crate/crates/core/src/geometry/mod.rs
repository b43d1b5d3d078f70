//! Surface-geometry utilities: triangle meshes, signed distance fields,
//! smoothed delta localization, region classification, enclosed volumes, cap
//! fluxes and thin plate spline warps.

use thiserror::Error;

pub mod field;
pub mod mesh;
pub mod sdf;
pub mod tps;

pub use field::{
    classify_regions, classify_value, ris_force_density, smoothed_delta, RegionClassification,
    RegionLabel, ScalarField,
};
pub use mesh::TriangleMesh;
pub use sdf::{signed_distance, unsigned_distance, winding_number};
pub use tps::{tps_apply, tps_fit, TpsTransform};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("face {face} references vertex {index} out of range")]
    IndexOutOfRange { face: usize, index: usize },
    #[error("mesh is not closed; {0} requires a closed oriented surface")]
    OpenMesh(&'static str),
    #[error("no face tagged with cap id {0}")]
    MissingCapTag(u32),
    #[error("velocity count mismatch: expected {expected} vertices, got {got}")]
    VelocityCountMismatch { expected: usize, got: usize },
    #[error("failed to parse mesh: bad or missing {0}")]
    ParseMesh(&'static str),
    #[error("degenerate landmark configuration: {0}")]
    DegenerateLandmarks(&'static str),
    #[error("landmark count mismatch: {n_source} source vs {n_target} target")]
    LandmarkCountMismatch { n_source: usize, n_target: usize },
    #[error("i/o error on {0}: {1}")]
    Io(String, #[source] std::io::Error),
}
