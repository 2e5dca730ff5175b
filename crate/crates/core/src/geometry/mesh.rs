use crate::{Error, Result, Vec3};

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    /// The cube `[-h, h]^3`.
    pub fn cube(half: f64) -> Self {
        Self::new(Vec3::repeat(-half), Vec3::repeat(half))
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb::new(self.min.inf(&other.min), self.max.sup(&other.max))
    }

    /// Non-degenerate when every extent is strictly positive and finite.
    pub fn is_valid(&self) -> bool {
        (0..3).all(|i| self.max[i] > self.min[i] && self.min[i].is_finite() && self.max[i].is_finite())
    }

    /// Slab test; returns the parametric interval of `origin + t * dir` inside
    /// the box, clipped to `t >= 0`.
    pub fn ray_interval(&self, origin: &Vec3, dir: &Vec3) -> Option<(f64, f64)> {
        let mut t0 = 0.0_f64;
        let mut t1 = f64::INFINITY;
        for i in 0..3 {
            if dir[i].abs() < 1e-300 {
                if origin[i] < self.min[i] || origin[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[i];
            let (mut a, mut b) = ((self.min[i] - origin[i]) * inv, (self.max[i] - origin[i]) * inv);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

/// Indexed triangle surface.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Builds a mesh, rejecting out-of-range indices and faces that repeat a
    /// vertex.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        for (i, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "face {i} references vertex out of range ({} vertices)",
                    vertices.len()
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(format!("face {i} repeats a vertex")));
            }
        }
        if let Some(i) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
        Ok(Self { vertices, faces })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[i];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangles(&self) -> impl Iterator<Item = [Vec3; 3]> + '_ {
        (0..self.faces.len()).map(move |i| self.triangle(i))
    }

    /// Bounding box of the referenced vertices; `None` for a mesh without
    /// vertices.
    pub fn bounds(&self) -> Option<Aabb> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold(Aabb::new(first, first), |b, v| Aabb::new(b.min.inf(v), b.max.sup(v))))
    }

    pub fn surface_area(&self) -> f64 {
        self.triangles().map(|[a, b, c]| (b - a).cross(&(c - a)).norm() * 0.5).sum()
    }

    /// Signed enclosed volume (positive for outward-facing orientation).
    pub fn signed_volume(&self) -> f64 {
        self.triangles().map(|[a, b, c]| a.dot(&b.cross(&c)) / 6.0).sum()
    }

    pub fn translated(&self, v: Vec3) -> Self {
        Self { vertices: self.vertices.iter().map(|p| p + v).collect(), faces: self.faces.clone() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { vertices: self.vertices.iter().map(|p| p * s).collect(), faces: self.faces.clone() }
    }

    /// Reverses every triangle's winding.
    pub fn flipped(&self) -> Self {
        Self { vertices: self.vertices.clone(), faces: self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect() }
    }

    /// Number of triangles incident to each undirected edge.
    pub fn edge_valences(&self) -> std::collections::HashMap<(usize, usize), usize> {
        let mut map = std::collections::HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *map.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        map
    }

    /// Closed 2-manifold check at the edge level: every edge borders exactly
    /// two triangles.
    pub fn is_watertight(&self) -> bool {
        !self.faces.is_empty() && self.edge_valences().values().all(|&n| n == 2)
    }

    /// V - E + F over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        for f in &self.faces {
            for &v in f {
                used[v] = true;
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        let e = self.edge_valences().len() as i64;
        v - e + self.faces.len() as i64
    }

    /// Concatenates two meshes.
    pub fn merged(&self, other: &TriangleMesh) -> Self {
        let off = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
        Self { vertices, faces }
    }
}

/// Maps normalized coordinates back to the original mesh units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationRecord {
    pub scale: f64,
    pub offset: Vec3,
}

impl NormalizationRecord {
    pub fn identity() -> Self {
        Self { scale: 1.0, offset: Vec3::zeros() }
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        (v - self.offset) * self.scale
    }

    pub fn invert(&self, v: &Vec3) -> Vec3 {
        v / self.scale + self.offset
    }
}

/// Centers the mesh at its bounding-box center and scales it uniformly so
/// the longest bounding-box edge becomes `1 - 2 * margin`.
pub fn normalize_mesh(mesh: &TriangleMesh, margin: f64) -> Result<(TriangleMesh, NormalizationRecord)> {
    if mesh.is_empty() {
        return Err(Error::InvalidMesh("mesh has no faces".into()));
    }
    if !(0.0..0.5).contains(&margin) {
        return Err(Error::InvalidParameter(format!("margin {margin} outside [0, 0.5)")));
    }
    let bounds = mesh.bounds().expect("non-empty mesh has vertices");
    let longest = bounds.extent().max();
    if longest <= 0.0 {
        return Err(Error::InvalidMesh("all vertices coincide".into()));
    }
    let record = NormalizationRecord { scale: (1.0 - 2.0 * margin) / longest, offset: bounds.center() };
    let vertices = mesh.vertices.iter().map(|v| record.apply(v)).collect();
    Ok((TriangleMesh { vertices, faces: mesh.faces.clone() }, record))
}
