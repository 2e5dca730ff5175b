use std::collections::HashMap;

use crate::geometry::{SdfGrid, TriangleMesh};
use crate::{par, Vec3};

use super::tables::{EDGE_TABLE, TRIANGLE_TABLE};

/// Distance below which two emitted vertices are merged.
pub const WELD_EPS: f64 = 1e-7;

const CORNERS: [[usize; 3]; 8] =
    [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]];

const EDGES: [(usize, usize); 12] =
    [(0, 1), (1, 2), (3, 2), (0, 3), (4, 5), (5, 6), (7, 6), (4, 7), (0, 4), (1, 5), (2, 6), (3, 7)];

/// Where an output vertex lives: strictly inside a lattice edge, or on a
/// lattice point when the crossing is within [`WELD_EPS`] of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum VertexKey {
    Edge(usize),
    Point(usize),
}

fn crossing(grid: &SdfGrid, iso: f64, a: usize, b: usize, axis: usize) -> (VertexKey, Vec3) {
    let (va, vb) = (grid.values()[a] as f64, grid.values()[b] as f64);
    let (pa, pb) = (grid.position_of(a), grid.position_of(b));
    let mut t = (iso - va) / (vb - va);
    if !t.is_finite() {
        t = 0.5;
    }
    let t = t.clamp(0.0, 1.0);
    let len = (pb - pa).norm();
    if t * len <= WELD_EPS {
        (VertexKey::Point(a), pa)
    } else if (1.0 - t) * len <= WELD_EPS {
        (VertexKey::Point(b), pb)
    } else {
        (VertexKey::Edge(3 * a + axis), pa + (pb - pa) * t)
    }
}

/// Triangles of one cell as vertex keys and positions.
fn polygonize_cell(grid: &SdfGrid, iso: f64, i: usize, j: usize, k: usize, out: &mut Vec<[(VertexKey, Vec3); 3]>) {
    let corner_idx: [usize; 8] = CORNERS.map(|c| grid.index(i + c[0], j + c[1], k + c[2]));
    let mut case = 0usize;
    for (bit, &ci) in corner_idx.iter().enumerate() {
        if grid.values()[ci] as f64 <= iso {
            case |= 1 << bit;
        }
    }
    let cut = EDGE_TABLE[case];
    if cut == 0 {
        return;
    }
    let mut verts: [Option<(VertexKey, Vec3)>; 12] = [None; 12];
    for (e, &(ca, cb)) in EDGES.iter().enumerate() {
        if cut & (1 << e) != 0 {
            let axis = (0..3).find(|&d| CORNERS[ca][d] != CORNERS[cb][d]).expect("edge spans one axis");
            verts[e] = Some(crossing(grid, iso, corner_idx[ca], corner_idx[cb], axis));
        }
    }
    for tri in TRIANGLE_TABLE[case].chunks_exact(3) {
        if tri[0] < 0 {
            break;
        }
        let v = |e: i8| verts[e as usize].expect("table edge is cut");
        // Table winding faces the inside region; swap to face outward.
        out.push([v(tri[0]), v(tri[2]), v(tri[1])]);
    }
}

/// Extracts the `iso` level set of a grid.
///
/// Lattice values `<= iso` count as inside. Triangles are ordered by cell
/// index and oriented with normals pointing towards larger values. Returns
/// an empty mesh when no cell straddles the level.
pub fn marching_cubes(grid: &SdfGrid, iso: f64) -> TriangleMesh {
    marching_cubes_with(grid, iso, par::parallel_available())
}

/// [`marching_cubes`] with explicit control over slab parallelism; the output
/// is identical either way.
pub fn marching_cubes_with(grid: &SdfGrid, iso: f64, parallel: bool) -> TriangleMesh {
    let [nx, ny, nz] = grid.resolution();
    let slabs = par::map_range(nz - 1, parallel, |k| {
        let mut tris = Vec::new();
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                polygonize_cell(grid, iso, i, j, k, &mut tris);
            }
        }
        tris
    });

    let mut index: HashMap<VertexKey, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for tri in slabs.into_iter().flatten() {
        let f = tri.map(|(key, p)| {
            *index.entry(key).or_insert_with(|| {
                vertices.push(p);
                vertices.len() - 1
            })
        });
        if f[0] != f[1] && f[1] != f[2] && f[0] != f[2] {
            faces.push(f);
        }
    }
    TriangleMesh::new(vertices, faces).expect("marching cubes emits valid faces")
}
