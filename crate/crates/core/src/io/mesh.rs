use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::topology::FilteredGrid;

/// Triangles smaller than this are dropped during extraction.
const MIN_AREA: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &Point, b: &Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl TriangleMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Unnormalized normal, twice the triangle area in length.
    pub fn normal(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        cross(&sub(&b, &a), &sub(&c, &a))
    }

    pub fn area(&self, t: usize) -> f64 {
        0.5 * dot(&self.normal(t), &self.normal(t)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::domain(format!("triangle {t:?} indexes past {n} vertices")));
        }
        Ok(())
    }

    /// ASCII OBJ with `v` and `f` lines.
    pub fn write_obj(&self, out: impl Write) -> std::io::Result<()> {
        let mut out = BufWriter::new(out);
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        out.flush()
    }

    /// Binary STL.
    pub fn write_stl(&self, out: impl Write) -> std::io::Result<()> {
        let mut out = BufWriter::new(out);
        let mut header = [0u8; 80];
        header[..9].copy_from_slice(b"topoblend");
        out.write_all(&header)?;
        out.write_all(&(self.triangles.len() as u32).to_le_bytes())?;
        for (i, t) in self.triangles.iter().enumerate() {
            let n = self.normal(i);
            let len = dot(&n, &n).sqrt();
            let unit = if len > 0.0 { n.map(|c| c / len) } else { n };
            for c in unit {
                out.write_all(&(c as f32).to_le_bytes())?;
            }
            for &v in t {
                for c in self.vertices[v] {
                    out.write_all(&(c as f32).to_le_bytes())?;
                }
            }
            out.write_all(&[0, 0])?;
        }
        out.flush()
    }

    /// Read `v` and `f` records; polygons are fanned into triangles and
    /// texture or normal indices after `/` are ignored.
    pub fn read_obj(input: impl std::io::Read) -> Result<Self> {
        let mut mesh = TriangleMesh::default();
        for (lineno, line) in BufReader::new(input).lines().enumerate() {
            let line = line.map_err(|e| Error::io("<obj>", e))?;
            let bad = |what: &str| Error::domain(format!("obj line {}: {what}", lineno + 1));
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("v") => {
                    let c: Vec<f64> = parts.take(3).map(str::parse).collect::<Result<_, _>>().map_err(|_| bad("bad vertex"))?;
                    if c.len() != 3 {
                        return Err(bad("vertex needs three coordinates"));
                    }
                    mesh.vertices.push([c[0], c[1], c[2]]);
                }
                Some("f") => {
                    let idx: Vec<usize> = parts
                        .map(|p| p.split('/').next().unwrap_or("").parse::<usize>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad("bad face index"))?;
                    if idx.len() < 3 || idx.contains(&0) {
                        return Err(bad("face needs three 1-based indices"));
                    }
                    for k in 1..idx.len() - 1 {
                        mesh.triangles.push([idx[0] - 1, idx[k] - 1, idx[k + 1] - 1]);
                    }
                }
                _ => {}
            }
        }
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let stl = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("stl"));
        if stl { self.write_stl(file) } else { self.write_obj(file) }.map_err(|e| Error::io(path, e))
    }
}

/// Six tetrahedra around the cube diagonal from corner 0 to corner 7; corner
/// bits are x, y, z. Adjacent cubes split shared faces the same way.
const TETS: [[usize; 4]; 6] = [[0, 1, 3, 7], [0, 3, 2, 7], [0, 2, 6, 7], [0, 6, 4, 7], [0, 4, 5, 7], [0, 5, 1, 7]];

/// Triangulate `{φ = iso}` by splitting each lattice cube into tetrahedra
/// and interpolating linearly along edges. Vertices on shared edges are
/// merged, and normals point toward larger values.
pub fn marching_cubes(grid: &FilteredGrid, iso: f64) -> TriangleMesh {
    let lat = grid.lattice();
    let [nx, ny, nz] = lat.dims;
    let values = grid.values();
    let mut mesh = TriangleMesh::default();
    let mut edge_vertex: HashMap<(usize, usize), usize> = HashMap::new();
    if nx < 2 || ny < 2 || nz < 2 {
        return mesh;
    }
    let mut vertex_on = |a: usize, b: usize, mesh: &mut TriangleMesh| -> usize {
        let key = if a < b { (a, b) } else { (b, a) };
        *edge_vertex.entry(key).or_insert_with(|| {
            let (lo, hi) = key;
            let (pa, pb) = (lat.point_at(lo), lat.point_at(hi));
            let (va, vb) = (values[lo], values[hi]);
            let t = ((iso - va) / (vb - va)).clamp(0.0, 1.0);
            mesh.vertices.push(std::array::from_fn(|k| pa[k] + t * (pb[k] - pa[k])));
            mesh.vertices.len() - 1
        })
    };
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let corner: [usize; 8] = std::array::from_fn(|c| lat.linear([i + (c & 1), j + ((c >> 1) & 1), k + (c >> 2)]));
                for tet in TETS {
                    let ids = tet.map(|c| corner[c]);
                    let (inside, outside): (Vec<usize>, Vec<usize>) = ids.iter().partition(|&&v| values[v] < iso);
                    let tris: Vec<[usize; 3]> = match inside.len() {
                        1 => {
                            let a = inside[0];
                            vec![[0, 1, 2].map(|q| vertex_on(a, outside[q], &mut mesh))]
                        }
                        3 => {
                            let b = outside[0];
                            vec![[0, 1, 2].map(|q| vertex_on(inside[q], b, &mut mesh))]
                        }
                        2 => {
                            let e00 = vertex_on(inside[0], outside[0], &mut mesh);
                            let e01 = vertex_on(inside[0], outside[1], &mut mesh);
                            let e11 = vertex_on(inside[1], outside[1], &mut mesh);
                            let e10 = vertex_on(inside[1], outside[0], &mut mesh);
                            vec![[e00, e01, e11], [e00, e11, e10]]
                        }
                        _ => continue,
                    };
                    let centroid = |set: &[usize]| -> Point {
                        let mut c = [0.0; 3];
                        for &v in set {
                            let p = lat.point_at(v);
                            (0..3).for_each(|a| c[a] += p[a] / set.len() as f64);
                        }
                        c
                    };
                    let outward = sub(&centroid(&outside), &centroid(&inside));
                    for mut t in tris {
                        let [a, b, c] = t.map(|v| mesh.vertices[v]);
                        let n = cross(&sub(&b, &a), &sub(&c, &a));
                        if 0.5 * dot(&n, &n).sqrt() <= MIN_AREA {
                            continue;
                        }
                        if dot(&n, &outward) < 0.0 {
                            t.swap(1, 2);
                        }
                        mesh.triangles.push(t);
                    }
                }
            }
        }
    }
    mesh
}
