//! Signed distance queries against closed triangle meshes: exact
//! point-to-triangle minimum distance with the sign taken from the
//! generalized winding number (negative inside).

use nalgebra::Point3;

use super::field::ScalarField;
use super::mesh::TriangleMesh;

/// Closest point on triangle (a, b, c) to p, by Voronoi-region
/// classification.
pub fn closest_point_on_triangle(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Point3<f64> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;

    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + v * ab;
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + w * ac;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + w * (c - b);
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Unsigned distance from p to the mesh surface (exact minimum over all
/// triangles).
pub fn unsigned_distance(mesh: &TriangleMesh, p: &Point3<f64>) -> f64 {
    let mut best = f64::INFINITY;
    for f in 0..mesh.faces.len() {
        let [a, b, c] = mesh.triangle(f);
        let q = closest_point_on_triangle(p, &a, &b, &c);
        let d2 = (p - q).norm_squared();
        if d2 < best {
            best = d2;
        }
    }
    best.sqrt()
}

/// Generalized winding number of the mesh around p (sum of signed solid
/// angles over 4π). Approximately 1 inside a closed outward-oriented
/// surface, 0 outside.
pub fn winding_number(mesh: &TriangleMesh, p: &Point3<f64>) -> f64 {
    let mut total = 0.0;
    for f in 0..mesh.faces.len() {
        let [a, b, c] = mesh.triangle(f);
        let va = a - p;
        let vb = b - p;
        let vc = c - p;
        let la = va.norm();
        let lb = vb.norm();
        let lc = vc.norm();
        let numerator = va.dot(&vb.cross(&vc));
        let denominator =
            la * lb * lc + va.dot(&vb) * lc + vb.dot(&vc) * la + vc.dot(&va) * lb;
        total += 2.0 * numerator.atan2(denominator);
    }
    total / (4.0 * std::f64::consts::PI)
}

/// Signed distances from the query points to the mesh: unsigned exact
/// point-to-triangle minimum, sign by winding number (inside negative).
///
/// An open mesh yields unsigned distances with the field's `signed` flag
/// cleared.
pub fn signed_distance(
    mesh: &TriangleMesh,
    points: &[Point3<f64>],
    epsilon: f64,
) -> ScalarField {
    let closed = mesh.is_closed();
    let values = points
        .iter()
        .map(|p| {
            let d = unsigned_distance(mesh, p);
            if closed && winding_number(mesh, p) > 0.5 {
                -d
            } else {
                d
            }
        })
        .collect();
    ScalarField {
        points: points.to_vec(),
        values,
        epsilon,
        signed: closed,
        mesh_id: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    // Independent point-triangle distance: minimum over the in-plane
    // projection (when its barycentric coordinates are non-negative), the
    // three edge segments and the three vertices.
    fn oracle_point_triangle_distance(
        p: &Point3<f64>,
        a: &Point3<f64>,
        b: &Point3<f64>,
        c: &Point3<f64>,
    ) -> f64 {
        let mut best = f64::INFINITY;

        let n = (b - a).cross(&(c - a));
        let nn = n.norm_squared();
        if nn > 0.0 {
            let t = (p - a).dot(&n) / nn;
            let proj = p - n * t;
            // barycentric coordinates of proj
            let v0 = b - a;
            let v1 = c - a;
            let v2 = proj - a;
            let d00 = v0.dot(&v0);
            let d01 = v0.dot(&v1);
            let d11 = v1.dot(&v1);
            let d20 = v2.dot(&v0);
            let d21 = v2.dot(&v1);
            let denom = d00 * d11 - d01 * d01;
            let v = (d11 * d20 - d01 * d21) / denom;
            let w = (d00 * d21 - d01 * d20) / denom;
            if v >= 0.0 && w >= 0.0 && v + w <= 1.0 {
                best = best.min((p - proj).norm());
            }
        }

        let segment = |p: &Point3<f64>, s: &Point3<f64>, e: &Point3<f64>| -> f64 {
            let d = e - s;
            let t = ((p - s).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
            (p - (s + d * t)).norm()
        };
        best = best.min(segment(p, a, b));
        best = best.min(segment(p, b, c));
        best = best.min(segment(p, c, a));
        best.min((p - a).norm()).min((p - b).norm()).min((p - c).norm())
    }

    fn oracle_unsigned_distance(mesh: &TriangleMesh, p: &Point3<f64>) -> f64 {
        (0..mesh.faces.len())
            .map(|f| {
                let [a, b, c] = mesh.triangle(f);
                oracle_point_triangle_distance(p, &a, &b, &c)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn sphere_center_distance_is_minus_one() {
        let sphere = TriangleMesh::icosphere(1.0, 5);
        let field = signed_distance(&sphere, &[Point3::origin()], 1.0);
        assert!(field.signed);
        assert!(
            (field.values[0] + 1.0).abs() < 2e-3,
            "got {}",
            field.values[0]
        );
    }

    #[test]
    fn query_on_vertex_is_zero() {
        let cube = TriangleMesh::unit_cube();
        let field = signed_distance(&cube, &[cube.vertices[3]], 1.0);
        assert_eq!(field.values[0], 0.0);
    }

    #[test]
    fn matches_brute_force_oracle() {
        let sphere = TriangleMesh::icosphere(1.0, 2);
        let mut seed = 7u64;
        for _ in 0..200 {
            let p = Point3::new(
                lcg(&mut seed) * 4.0 - 2.0,
                lcg(&mut seed) * 4.0 - 2.0,
                lcg(&mut seed) * 4.0 - 2.0,
            );
            let d_impl = unsigned_distance(&sphere, &p);
            let d_oracle = oracle_unsigned_distance(&sphere, &p);
            assert!(
                (d_impl - d_oracle).abs() < 1e-12,
                "impl {d_impl} vs oracle {d_oracle} at {p:?}"
            );
        }
    }

    #[test]
    fn sign_consistency_on_cube_and_sphere() {
        let cube = TriangleMesh::unit_cube();
        let sphere = TriangleMesh::icosphere(1.0, 2);
        let mut seed = 99u64;
        for _ in 0..100 {
            let q = Point3::new(lcg(&mut seed), lcg(&mut seed), lcg(&mut seed));
            // strictly inside the cube (margin avoids boundary ties)
            let inside = Point3::new(
                0.05 + 0.9 * q.x,
                0.05 + 0.9 * q.y,
                0.05 + 0.9 * q.z,
            );
            let f = signed_distance(&cube, &[inside], 1.0);
            assert!(f.values[0] < 0.0, "{inside:?} gave {}", f.values[0]);

            let dir = Vector3::new(q.x - 0.5, q.y - 0.5, q.z - 0.5);
            if dir.norm() > 1e-3 {
                let outside = Point3::from(dir.normalize() * 1.5);
                let f = signed_distance(&sphere, &[outside], 1.0);
                assert!(f.values[0] > 0.0);
                let inside = Point3::from(dir.normalize() * 0.5);
                let f = signed_distance(&sphere, &[inside], 1.0);
                assert!(f.values[0] < 0.0);
            }
        }
    }

    #[test]
    fn open_mesh_yields_unsigned_with_flag() {
        let mut cube = TriangleMesh::unit_cube();
        cube.faces.pop();
        cube.cap_tags.pop();
        let inside = Point3::new(0.5, 0.5, 0.5);
        let field = signed_distance(&cube, &[inside], 1.0);
        assert!(!field.signed);
        assert!(field.values[0] > 0.0);
    }
}
