//! Triangle surface meshes: ASCII I/O, closedness/orientation checks,
//! enclosed volume and cap flux integration. Lengths in cm, volumes in mL,
//! flows in mL/s.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{Point3, Vector3};

use super::GeometryError;

/// Indexed triangle mesh with optional per-face cap tags (untagged faces are
/// walls).
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[usize; 3]>,
    pub cap_tags: Vec<Option<u32>>,
}

impl TriangleMesh {
    pub fn new(
        vertices: Vec<Point3<f64>>,
        faces: Vec<[usize; 3]>,
    ) -> Result<Self, GeometryError> {
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= n {
                    return Err(GeometryError::IndexOutOfRange { face: fi, index: v });
                }
            }
        }
        let cap_tags = vec![None; faces.len()];
        Ok(Self {
            vertices,
            faces,
            cap_tags,
        })
    }

    pub fn triangle(&self, f: usize) -> [Point3<f64>; 3] {
        let [i, j, k] = self.faces[f];
        [self.vertices[i], self.vertices[j], self.vertices[k]]
    }

    /// True when every edge is shared by exactly two faces traversed in
    /// opposite directions.
    pub fn is_closed(&self) -> bool {
        let mut directed: HashMap<(usize, usize), isize> = HashMap::new();
        for f in &self.faces {
            for e in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        directed.iter().all(|(&(a, b), &count)| {
            count == 1 && directed.get(&(b, a)).copied().unwrap_or(0) == 1
        })
    }

    /// Signed enclosed volume by the divergence theorem (sum of signed
    /// tetrahedra against the origin). Positive for outward orientation.
    pub fn enclosed_volume(&self) -> Result<f64, GeometryError> {
        if !self.is_closed() {
            return Err(GeometryError::OpenMesh("enclosed_volume"));
        }
        let mut vol = 0.0;
        for f in 0..self.faces.len() {
            let [a, b, c] = self.triangle(f);
            vol += a.coords.dot(&b.coords.cross(&c.coords)) / 6.0;
        }
        Ok(vol)
    }

    /// Flips every face, negating orientation.
    pub fn flip_orientation(&mut self) {
        for f in &mut self.faces {
            f.swap(1, 2);
        }
    }

    pub fn face_normal_area(&self, f: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangle(f);
        0.5 * (b - a).cross(&(c - a))
    }

    /// Flux of a vertex velocity field [cm/s] through the faces tagged with
    /// `cap`: sum over cap triangles of area x (face-average velocity)·n̂.
    pub fn cap_flux(&self, cap: u32, velocities: &[Vector3<f64>]) -> Result<f64, GeometryError> {
        if velocities.len() != self.vertices.len() {
            return Err(GeometryError::VelocityCountMismatch {
                expected: self.vertices.len(),
                got: velocities.len(),
            });
        }
        let mut any = false;
        let mut flux = 0.0;
        for (f, tag) in self.cap_tags.iter().enumerate() {
            if *tag == Some(cap) {
                any = true;
                let [i, j, k] = self.faces[f];
                let v_avg = (velocities[i] + velocities[j] + velocities[k]) / 3.0;
                flux += v_avg.dot(&self.face_normal_area(f));
            }
        }
        if !any {
            return Err(GeometryError::MissingCapTag(cap));
        }
        Ok(flux)
    }

    /// Reads the ASCII format: one header line `<n_vertices> <n_faces>`,
    /// then vertex lines `x y z` and 0-based face lines `i j k`.
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let mut tokens = text.split_whitespace();
        let mut next_usize = |what: &'static str| -> Result<usize, GeometryError> {
            tokens
                .next()
                .ok_or(GeometryError::ParseMesh(what))?
                .parse::<usize>()
                .map_err(|_| GeometryError::ParseMesh(what))
        };
        let nv = next_usize("vertex count")?;
        let nf = next_usize("face count")?;
        let mut rest = text.split_whitespace().skip(2);
        let mut next_f64 = |what: &'static str| -> Result<f64, GeometryError> {
            rest.next()
                .ok_or(GeometryError::ParseMesh(what))?
                .parse::<f64>()
                .map_err(|_| GeometryError::ParseMesh(what))
        };
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let x = next_f64("vertex coordinate")?;
            let y = next_f64("vertex coordinate")?;
            let z = next_f64("vertex coordinate")?;
            vertices.push(Point3::new(x, y, z));
        }
        let mut faces = Vec::with_capacity(nf);
        for _ in 0..nf {
            let mut idx = [0usize; 3];
            for slot in &mut idx {
                let v = next_f64("face index")?;
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(GeometryError::ParseMesh("face index"));
                }
                *slot = v as usize;
            }
            faces.push(idx);
        }
        Self::new(vertices, faces)
    }

    pub fn load(path: &Path) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeometryError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.vertices.len(), self.faces.len()));
        for v in &self.vertices {
            out.push_str(&format!("{} {} {}\n", v.x, v.y, v.z));
        }
        for f in &self.faces {
            out.push_str(&format!("{} {} {}\n", f[0], f[1], f[2]));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), GeometryError> {
        std::fs::write(path, self.to_ascii())
            .map_err(|e| GeometryError::Io(path.display().to_string(), e))
    }

    /// Loads cap tags from a sidecar CSV with header `face,cap` and rows of
    /// face index / cap id pairs.
    pub fn load_cap_tags(&mut self, path: &Path) -> Result<(), GeometryError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeometryError::Io(path.display().to_string(), e))?;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (ln == 0 && line.starts_with("face")) {
                continue;
            }
            let mut parts = line.split(',');
            let face: usize = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or(GeometryError::ParseMesh("cap tag face index"))?;
            let cap: u32 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or(GeometryError::ParseMesh("cap tag id"))?;
            if face >= self.faces.len() {
                return Err(GeometryError::IndexOutOfRange { face, index: face });
            }
            self.cap_tags[face] = Some(cap);
        }
        Ok(())
    }

    /// Axis-aligned unit cube [0,1]^3 with outward orientation.
    pub fn unit_cube() -> Self {
        let v = |x: f64, y: f64, z: f64| Point3::new(x, y, z);
        let vertices = vec![
            v(0., 0., 0.),
            v(1., 0., 0.),
            v(1., 1., 0.),
            v(0., 1., 0.),
            v(0., 0., 1.),
            v(1., 0., 1.),
            v(1., 1., 1.),
            v(0., 1., 1.),
        ];
        let faces = vec![
            // bottom (z=0), normal -z
            [0, 2, 1],
            [0, 3, 2],
            // top (z=1), normal +z
            [4, 5, 6],
            [4, 6, 7],
            // front (y=0), normal -y
            [0, 1, 5],
            [0, 5, 4],
            // back (y=1), normal +y
            [2, 3, 7],
            [2, 7, 6],
            // left (x=0), normal -x
            [0, 4, 7],
            [0, 7, 3],
            // right (x=1), normal +x
            [1, 2, 6],
            [1, 6, 5],
        ];
        Self::new(vertices, faces).unwrap()
    }

    /// Icosphere of the given radius centred at the origin, `subdivisions`
    /// rounds of 1-to-4 triangle splitting, outward orientation.
    pub fn icosphere(radius: f64, subdivisions: u32) -> Self {
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let mut vertices: Vec<Point3<f64>> = [
            (-1.0, phi, 0.0),
            (1.0, phi, 0.0),
            (-1.0, -phi, 0.0),
            (1.0, -phi, 0.0),
            (0.0, -1.0, phi),
            (0.0, 1.0, phi),
            (0.0, -1.0, -phi),
            (0.0, 1.0, -phi),
            (phi, 0.0, -1.0),
            (phi, 0.0, 1.0),
            (-phi, 0.0, -1.0),
            (-phi, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| {
            let v = Vector3::new(x, y, z).normalize();
            Point3::from(v)
        })
        .collect();

        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];

        for _ in 0..subdivisions {
            let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
            let mut new_faces = Vec::with_capacity(faces.len() * 4);
            for f in &faces {
                let mut mid = [0usize; 3];
                for (e, (a, b)) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])]
                    .into_iter()
                    .enumerate()
                {
                    let key = (a.min(b), a.max(b));
                    mid[e] = *midpoint.entry(key).or_insert_with(|| {
                        let m = (vertices[a].coords + vertices[b].coords).normalize();
                        vertices.push(Point3::from(m));
                        vertices.len() - 1
                    });
                }
                new_faces.push([f[0], mid[0], mid[2]]);
                new_faces.push([f[1], mid[1], mid[0]]);
                new_faces.push([f[2], mid[2], mid[1]]);
                new_faces.push([mid[0], mid[1], mid[2]]);
            }
            faces = new_faces;
        }

        for v in &mut vertices {
            v.coords *= radius;
        }
        Self::new(vertices, faces).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cube_volume_is_one() {
        let cube = TriangleMesh::unit_cube();
        assert!(cube.is_closed());
        assert_relative_eq!(cube.enclosed_volume().unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn orientation_flip_negates_volume() {
        let mut cube = TriangleMesh::unit_cube();
        let v = cube.enclosed_volume().unwrap();
        cube.flip_orientation();
        assert_relative_eq!(cube.enclosed_volume().unwrap(), -v, max_relative = 1e-14);
    }

    #[test]
    fn icosphere_volume_near_analytic() {
        let sphere = TriangleMesh::icosphere(1.0, 5);
        assert!(sphere.is_closed());
        let v = sphere.enclosed_volume().unwrap();
        let exact = 4.0 * std::f64::consts::PI / 3.0;
        assert!(
            (v - exact).abs() / exact < 0.005,
            "volume {v} vs {exact}"
        );
    }

    #[test]
    fn open_mesh_volume_rejected() {
        let mut cube = TriangleMesh::unit_cube();
        cube.faces.pop();
        cube.cap_tags.pop();
        assert!(!cube.is_closed());
        assert!(matches!(
            cube.enclosed_volume(),
            Err(GeometryError::OpenMesh(_))
        ));
    }

    #[test]
    fn cap_flux_uniform_normal_velocity() {
        // top face of the unit cube (area 2 triangles = 1 cm^2 total), tag 7;
        // expand to 2 cm^2 by scaling x.
        let mut cube = TriangleMesh::unit_cube();
        for v in &mut cube.vertices {
            v.x *= 2.0;
        }
        cube.cap_tags[2] = Some(7);
        cube.cap_tags[3] = Some(7);
        let velocities = vec![Vector3::new(0.0, 0.0, 1.0); cube.vertices.len()];
        let q = cube.cap_flux(7, &velocities).unwrap();
        assert_relative_eq!(q, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn cap_flux_tangent_velocity_is_zero() {
        let mut cube = TriangleMesh::unit_cube();
        cube.cap_tags[2] = Some(1);
        cube.cap_tags[3] = Some(1);
        let velocities = vec![Vector3::new(0.3, -1.2, 0.0); cube.vertices.len()];
        let q = cube.cap_flux(1, &velocities).unwrap();
        assert_relative_eq!(q, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn cap_flux_missing_tag_errors() {
        let cube = TriangleMesh::unit_cube();
        let velocities = vec![Vector3::zeros(); cube.vertices.len()];
        assert!(matches!(
            cube.cap_flux(3, &velocities),
            Err(GeometryError::MissingCapTag(3))
        ));
    }

    #[test]
    fn cap_flux_linear_in_velocity() {
        let mut cube = TriangleMesh::unit_cube();
        cube.cap_tags[10] = Some(2);
        cube.cap_tags[11] = Some(2);
        let mut rng = 2654435761u64;
        let mut rand = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let va: Vec<Vector3<f64>> = (0..8).map(|_| Vector3::new(rand(), rand(), rand())).collect();
        let vb: Vec<Vector3<f64>> = (0..8).map(|_| Vector3::new(rand(), rand(), rand())).collect();
        let (a, b) = (1.3, -2.7);
        let combined: Vec<Vector3<f64>> =
            va.iter().zip(&vb).map(|(x, y)| a * x + b * y).collect();
        let qa = cube.cap_flux(2, &va).unwrap();
        let qb = cube.cap_flux(2, &vb).unwrap();
        let qc = cube.cap_flux(2, &combined).unwrap();
        assert_relative_eq!(qc, a * qa + b * qb, max_relative = 1e-12, epsilon = 1e-13);
    }

    #[test]
    fn ascii_roundtrip() {
        let sphere = TriangleMesh::icosphere(0.5, 1);
        let text = sphere.to_ascii();
        let back = TriangleMesh::parse(&text).unwrap();
        assert_eq!(back.vertices.len(), sphere.vertices.len());
        assert_eq!(back.faces, sphere.faces);
        for (a, b) in back.vertices.iter().zip(&sphere.vertices) {
            assert_relative_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }
}
