//! Procedural test meshes and the matching analytic signed distance fields.

use std::collections::HashMap;

use crate::{Vec2, Vec3};

use super::TriangleMesh;

/// Axis-aligned box mesh with outward-facing triangles.
pub fn cube(min: Vec3, max: Vec3) -> TriangleMesh {
    let v = |x: usize, y: usize, z: usize| {
        Vec3::new(
            if x == 0 { min.x } else { max.x },
            if y == 0 { min.y } else { max.y },
            if z == 0 { min.z } else { max.z },
        )
    };
    let vertices = vec![v(0, 0, 0), v(1, 0, 0), v(1, 1, 0), v(0, 1, 0), v(0, 0, 1), v(1, 0, 1), v(1, 1, 1), v(0, 1, 1)];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [3, 6, 2],
        [3, 7, 6],
        [0, 4, 7],
        [0, 7, 3],
        [1, 2, 6],
        [1, 6, 5],
    ];
    TriangleMesh::new(vertices, faces).expect("static cube topology")
}

/// The cube `[-0.5, 0.5]^3`.
pub fn unit_cube() -> TriangleMesh {
    cube(Vec3::repeat(-0.5), Vec3::repeat(0.5))
}

/// Subdivided icosahedron projected onto a sphere.
pub fn icosphere(center: Vec3, radius: f64, subdivisions: u32) -> TriangleMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
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
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
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
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = verts.into_iter().map(|v| center + v * radius).collect();
    TriangleMesh::new(vertices, faces).expect("icosphere topology")
}

/// Largest distance between the mesh and the sphere it approximates: the
/// sagitta of the worst facet, measured at facet centroids and edge
/// midpoints (vertices lie on the sphere exactly).
pub fn max_facet_deviation(mesh: &TriangleMesh, center: Vec3, radius: f64) -> f64 {
    mesh.triangles()
        .flat_map(|[a, b, c]| [(a + b + c) / 3.0, (a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5])
        .map(|p| (radius - (p - center).norm()).abs())
        .fold(0.0, f64::max)
}

/// Torus around the z axis with tube radius `minor`, sampled on an
/// `nu x nv` parameter grid.
pub fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> TriangleMesh {
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = std::f64::consts::TAU * i as f64 / nu as f64;
        for j in 0..nv {
            let v = std::f64::consts::TAU * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            vertices.push(Vec3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("torus topology")
}

/// Closed-form signed distance fields used as ground truth for the
/// single-shape experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalyticShape {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    Box {
        half: Vec3,
    },
    /// Torus around the z axis.
    Torus {
        major: f64,
        minor: f64,
    },
    /// Torus with a small sphere fused onto its outer rim; the bump is the
    /// localized detail visible in a depth image.
    TorusBump {
        major: f64,
        minor: f64,
        bump_center: Vec3,
        bump_radius: f64,
    },
}

impl AnalyticShape {
    pub fn default_sphere() -> Self {
        AnalyticShape::Sphere { center: Vec3::zeros(), radius: 0.4 }
    }

    pub fn default_cube() -> Self {
        AnalyticShape::Box { half: Vec3::repeat(0.3) }
    }

    pub fn default_torus() -> Self {
        AnalyticShape::Torus { major: 0.3, minor: 0.1 }
    }

    pub fn default_torus_bump() -> Self {
        AnalyticShape::TorusBump {
            major: 0.28,
            minor: 0.09,
            bump_center: Vec3::new(0.0, -0.28, 0.09),
            bump_radius: 0.08,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "sphere" => Some(Self::default_sphere()),
            "cube" => Some(Self::default_cube()),
            "torus" => Some(Self::default_torus()),
            "torus_bump" | "torus-bump" => Some(Self::default_torus_bump()),
            _ => None,
        }
    }

    pub fn sdf(&self, p: &Vec3) -> f64 {
        match *self {
            AnalyticShape::Sphere { center, radius } => (p - center).norm() - radius,
            AnalyticShape::Box { half } => {
                let q = p.abs() - half;
                q.sup(&Vec3::zeros()).norm() + q.max().min(0.0)
            }
            AnalyticShape::Torus { major, minor } => torus_sdf(p, major, minor),
            AnalyticShape::TorusBump { major, minor, bump_center, bump_radius } => {
                torus_sdf(p, major, minor).min((p - bump_center).norm() - bump_radius)
            }
        }
    }
}

fn torus_sdf(p: &Vec3, major: f64, minor: f64) -> f64 {
    let q = Vec2::new(Vec2::new(p.x, p.y).norm() - major, p.z);
    q.norm() - minor
}
