//! Thin plate spline warps in 3D with the linear radial kernel U(r) = r,
//! used to morph template valve annuli onto patient surfaces.

use nalgebra::{DMatrix, DVector, Matrix3, Point3, Vector3};

use super::GeometryError;

/// Landmark-interpolating warp: affine part plus radial terms anchored at
/// the source landmarks.
#[derive(Debug, Clone)]
pub struct TpsTransform {
    pub source: Vec<Point3<f64>>,
    /// Per-landmark radial coefficients (one 3-vector each).
    pub radial: Vec<Vector3<f64>>,
    pub affine_linear: Matrix3<f64>,
    pub affine_translation: Vector3<f64>,
}

/// Fits the interpolating TPS mapping source landmarks onto target
/// landmarks. Requires at least 4 non-coplanar landmarks.
pub fn tps_fit(
    source: &[Point3<f64>],
    target: &[Point3<f64>],
) -> Result<TpsTransform, GeometryError> {
    let n = source.len();
    if n != target.len() {
        return Err(GeometryError::LandmarkCountMismatch {
            n_source: n,
            n_target: target.len(),
        });
    }
    if n < 4 {
        return Err(GeometryError::DegenerateLandmarks(
            "need at least 4 landmarks",
        ));
    }

    let dim = n + 4;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (source[i] - source[j]).norm();
        }
        a[(i, n)] = 1.0;
        a[(i, n + 1)] = source[i].x;
        a[(i, n + 2)] = source[i].y;
        a[(i, n + 3)] = source[i].z;
        a[(n, i)] = 1.0;
        a[(n + 1, i)] = source[i].x;
        a[(n + 2, i)] = source[i].y;
        a[(n + 3, i)] = source[i].z;
    }

    let lu = a.full_piv_lu();
    // coplanar landmarks make the polynomial block rank deficient; detect it
    // from the diagonal of U
    let u = lu.u();
    let tol = 1e-9 * scale_of(source);
    if (0..dim).any(|i| u[(i, i)].abs() <= tol) {
        return Err(GeometryError::DegenerateLandmarks(
            "landmark configuration is rank deficient (coplanar or coincident)",
        ));
    }

    let mut radial = vec![Vector3::zeros(); n];
    let mut affine_linear = Matrix3::zeros();
    let mut affine_translation = Vector3::zeros();
    for axis in 0..3 {
        let mut rhs = DVector::<f64>::zeros(dim);
        for i in 0..n {
            rhs[i] = target[i][axis];
        }
        let sol = lu
            .solve(&rhs)
            .ok_or(GeometryError::DegenerateLandmarks("singular TPS system"))?;
        for i in 0..n {
            radial[i][axis] = sol[i];
        }
        affine_translation[axis] = sol[n];
        for k in 0..3 {
            affine_linear[(axis, k)] = sol[n + 1 + k];
        }
    }

    Ok(TpsTransform {
        source: source.to_vec(),
        radial,
        affine_linear,
        affine_translation,
    })
}

fn scale_of(points: &[Point3<f64>]) -> f64 {
    let mut max = 0.0f64;
    for p in points {
        max = max.max(p.coords.norm());
    }
    max.max(1.0)
}

/// Applies the warp to a set of points.
pub fn tps_apply(t: &TpsTransform, points: &[Point3<f64>]) -> Vec<Point3<f64>> {
    points
        .iter()
        .map(|p| {
            let mut out = t.affine_translation + t.affine_linear * p.coords;
            for (s, w) in t.source.iter().zip(&t.radial) {
                out += *w * (p - s).norm();
            }
            Point3::from(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    fn random_landmarks(n: usize, seed: u64) -> Vec<Point3<f64>> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                Point3::new(
                    lcg(&mut s) * 4.0 - 2.0,
                    lcg(&mut s) * 4.0 - 2.0,
                    lcg(&mut s) * 4.0 - 2.0,
                )
            })
            .collect()
    }

    #[test]
    fn identity_transform_has_zero_radial_coefficients() {
        let src = random_landmarks(8, 11);
        let t = tps_fit(&src, &src).unwrap();
        for w in &t.radial {
            assert!(w.norm() < 1e-9, "radial coefficient {w:?}");
        }
        let moved = tps_apply(&t, &src);
        for (a, b) in moved.iter().zip(&src) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn translation_reproduced_exactly() {
        let src = random_landmarks(6, 5);
        let shift = Vector3::new(0.4, -1.1, 2.5);
        let dst: Vec<_> = src.iter().map(|p| p + shift).collect();
        let t = tps_fit(&src, &dst).unwrap();
        let probes = random_landmarks(20, 77);
        let moved = tps_apply(&t, &probes);
        for (m, p) in moved.iter().zip(&probes) {
            assert!((m - (p + shift)).norm() < 1e-9, "{m:?} vs {:?}", p + shift);
        }
    }

    #[test]
    fn interpolates_landmarks_to_1e9() {
        let src = random_landmarks(12, 3);
        let dst = random_landmarks(12, 4);
        let t = tps_fit(&src, &dst).unwrap();
        let moved = tps_apply(&t, &src);
        for (m, d) in moved.iter().zip(&dst) {
            assert!((m - d).norm() < 1e-9, "landmark error {}", (m - d).norm());
        }
    }

    #[test]
    fn coplanar_landmarks_rejected() {
        let mut src = random_landmarks(8, 9);
        for p in &mut src {
            p.z = 0.0;
        }
        let dst = random_landmarks(8, 10);
        assert!(matches!(
            tps_fit(&src, &dst),
            Err(GeometryError::DegenerateLandmarks(_))
        ));
    }

    #[test]
    fn too_few_landmarks_rejected() {
        let src = random_landmarks(3, 1);
        let dst = random_landmarks(3, 2);
        assert!(tps_fit(&src, &dst).is_err());
    }
}
