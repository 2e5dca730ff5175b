//! Mesh, grid and point-sample file formats.
//!
//! - OBJ subset: `v x y z` and `f i j k` (1-based, `i/t/n` accepted, polygons
//!   fan-triangulated); other line types are ignored.
//! - ASCII PLY with `vertex` and `face` elements.
//! - `SDFG` binary grids: magic, `u32` version 1, `u32` rx ry rz, six `f32`
//!   box values (min xyz, max xyz), then rx·ry·rz `f32` values, x-fastest,
//!   all little-endian.
//! - Point samples: one `x y z s` line per sample.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{Error, Result, Vec3};

use super::{Aabb, PointSample, SdfGrid, TriangleMesh};

pub const GRID_MAGIC: &[u8; 4] = b"SDFG";
pub const GRID_VERSION: u32 = 1;

fn parse_f64(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse::<f64>().map_err(|_| Error::parse(line, format!("invalid {what} `{tok}`")))
}

pub fn read_obj<R: BufRead>(reader: R) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), lineno, "x coordinate")?;
                let y = parse_f64(toks.next(), lineno, "y coordinate")?;
                let z = parse_f64(toks.next(), lineno, "z coordinate")?;
                vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in toks {
                    let head = tok.split('/').next().unwrap_or("");
                    let raw: i64 =
                        head.parse().map_err(|_| Error::parse(lineno, format!("invalid face index `{tok}`")))?;
                    let resolved = match raw {
                        0 => return Err(Error::parse(lineno, "face index 0 is not valid in OBJ")),
                        r if r > 0 => (r - 1) as usize,
                        r => {
                            let back = (-r) as usize;
                            if back > vertices.len() {
                                return Err(Error::parse(lineno, format!("relative index {r} out of range")));
                            }
                            vertices.len() - back
                        }
                    };
                    idx.push(resolved);
                }
                if idx.len() < 3 {
                    return Err(Error::parse(lineno, "face needs at least 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

pub fn write_obj<W: Write>(mut w: W, mesh: &TriangleMesh) -> Result<()> {
    for v in mesh.vertices() {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in mesh.faces() {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ply<R: BufRead>(reader: R) -> Result<TriangleMesh> {
    let mut lines = reader.lines().enumerate();
    let mut n_vertices = None;
    let mut n_faces = 0usize;
    let mut current = "";
    let mut vertex_props = 0usize;
    let mut saw_magic = false;
    for (n, line) in lines.by_ref() {
        let line = line?;
        let lineno = n + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["ply"] => saw_magic = true,
            ["format", fmt, ..] if *fmt != "ascii" => {
                return Err(Error::parse(lineno, format!("unsupported PLY format `{fmt}`")))
            }
            ["element", "vertex", count] => {
                n_vertices = Some(count.parse().map_err(|_| Error::parse(lineno, "bad vertex count"))?);
                current = "vertex";
            }
            ["element", "face", count] => {
                n_faces = count.parse().map_err(|_| Error::parse(lineno, "bad face count"))?;
                current = "face";
            }
            ["element", ..] => current = "other",
            ["property", ..] if current == "vertex" => vertex_props += 1,
            ["end_header"] => break,
            _ => {}
        }
        if lineno == 1 && !saw_magic {
            return Err(Error::parse(1, "missing `ply` magic"));
        }
    }
    let n_vertices = n_vertices.ok_or_else(|| Error::Format("PLY header lacks a vertex element".into()))?;
    if vertex_props < 3 {
        return Err(Error::Format("PLY vertices need x y z properties".into()));
    }
    let mut vertices = Vec::with_capacity(n_vertices);
    let mut faces = Vec::with_capacity(n_faces);
    let mut face_lines = 0usize;
    while vertices.len() < n_vertices || face_lines < n_faces {
        let Some((n, line)) = lines.next() else {
            return Err(Error::Format("PLY body ended early".into()));
        };
        let line = line?;
        let lineno = n + 1;
        let mut toks = line.split_whitespace();
        if vertices.len() < n_vertices {
            let x = parse_f64(toks.next(), lineno, "x")?;
            let y = parse_f64(toks.next(), lineno, "y")?;
            let z = parse_f64(toks.next(), lineno, "z")?;
            vertices.push(Vec3::new(x, y, z));
        } else {
            let idx: Vec<usize> = toks
                .map(|t| t.parse::<usize>().map_err(|_| Error::parse(lineno, format!("invalid index `{t}`"))))
                .collect::<Result<_>>()?;
            let (&count, rest) = idx.split_first().ok_or_else(|| Error::parse(lineno, "empty face line"))?;
            if count < 3 || rest.len() < count {
                return Err(Error::parse(lineno, "malformed face"));
            }
            for k in 1..count - 1 {
                faces.push([rest[0], rest[k], rest[k + 1]]);
            }
            face_lines += 1;
        }
    }
    TriangleMesh::new(vertices, faces)
}

/// Loads an OBJ or PLY mesh, chosen by file extension (OBJ otherwise).
pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    let reader = BufReader::new(File::open(path)?);
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("ply") => read_ply(reader),
        _ => read_obj(reader),
    }
}

pub fn save_obj(path: &Path, mesh: &TriangleMesh) -> Result<()> {
    write_obj(BufWriter::new(File::create(path)?), mesh)
}

pub fn write_grid<W: Write>(mut w: W, grid: &SdfGrid) -> Result<()> {
    w.write_all(GRID_MAGIC)?;
    w.write_all(&GRID_VERSION.to_le_bytes())?;
    for r in grid.resolution() {
        w.write_all(&(r as u32).to_le_bytes())?;
    }
    let b = grid.bbox();
    for v in b.min.iter().chain(b.max.iter()) {
        w.write_all(&(*v as f32).to_le_bytes())?;
    }
    for v in grid.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32<R: Read>(r: &mut R) -> Result<f32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(f32::from_le_bytes(b))
}

pub fn read_grid<R: Read>(mut r: R) -> Result<SdfGrid> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != GRID_MAGIC {
        return Err(Error::Format("not an SDFG file".into()));
    }
    let version = read_u32(&mut r)?;
    if version != GRID_VERSION {
        return Err(Error::Format(format!("unsupported SDFG version {version}")));
    }
    let res = [read_u32(&mut r)? as usize, read_u32(&mut r)? as usize, read_u32(&mut r)? as usize];
    let mut corners = [0.0f64; 6];
    for c in corners.iter_mut() {
        *c = read_f32(&mut r)? as f64;
    }
    let n = res.iter().product::<usize>();
    let mut bytes = vec![0u8; n * 4];
    r.read_exact(&mut bytes)?;
    let values = bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    let bbox = Aabb::new(Vec3::new(corners[0], corners[1], corners[2]), Vec3::new(corners[3], corners[4], corners[5]));
    SdfGrid::new(res, bbox, values)
}

pub fn save_grid(path: &Path, grid: &SdfGrid) -> Result<()> {
    write_grid(BufWriter::new(File::create(path)?), grid)
}

pub fn load_grid(path: &Path) -> Result<SdfGrid> {
    read_grid(BufReader::new(File::open(path)?))
}

pub fn write_points<W: Write>(mut w: W, samples: &[PointSample]) -> Result<()> {
    for s in samples {
        writeln!(w, "{} {} {} {}", s.p.x, s.p.y, s.p.z, s.s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_points<R: BufRead>(reader: R) -> Result<Vec<PointSample>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut t = line.split_whitespace();
        let x = parse_f64(t.next(), n + 1, "x")?;
        let y = parse_f64(t.next(), n + 1, "y")?;
        let z = parse_f64(t.next(), n + 1, "z")?;
        let s = parse_f64(t.next(), n + 1, "s")?;
        out.push(PointSample { p: Vec3::new(x, y, z), s });
    }
    Ok(out)
}

pub fn save_points(path: &Path, samples: &[PointSample]) -> Result<()> {
    write_points(BufWriter::new(File::create(path)?), samples)
}

pub fn load_points(path: &Path) -> Result<Vec<PointSample>> {
    read_points(BufReader::new(File::open(path)?))
}
