//! Sub-level persistence on the vertex-valued cubical complex of a grid.

mod grid;
mod oracle;
mod persistence;

pub use grid::{sample_field, FilteredGrid};
pub use oracle::{euler_characteristic, oracle_betti};
pub use persistence::{compute_persistence, compute_persistence_with, PersistenceOptions};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for an essential class.
    pub death: f64,
    /// Linear index of the grid vertex attaining `birth`.
    pub birth_vertex: usize,
    /// Linear index of the grid vertex attaining `death`; absent when essential.
    pub death_vertex: Option<usize>,
}

impl PersistencePair {
    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn alive_at(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
    /// Vertex counts of the grid the diagram came from.
    pub resolution: [usize; 3],
    pub field_hash: u64,
    /// Dimensions that were computed.
    pub dims: [bool; 3],
}

impl PersistenceDiagram {
    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// `β_k(t)` as the number of dimension-`k` pairs alive at `t`.
    pub fn betti_at(&self, t: f64) -> [usize; 3] {
        let mut b = [0; 3];
        for p in &self.pairs {
            if p.alive_at(t) {
                b[p.dim] += 1;
            }
        }
        b
    }

    /// CSV with columns `dim,birth,death,bx,by,bz,dx,dy,dz`; vertex columns
    /// are lattice indices, and the death vertex is blank for essential pairs.
    pub fn write_csv(&self, grid: &FilteredGrid, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "dim,birth,death,bx,by,bz,dx,dy,dz")?;
        for p in &self.pairs {
            let b = grid.lattice().unravel(p.birth_vertex);
            let death = if p.is_essential() { "inf".to_string() } else { p.death.to_string() };
            write!(out, "{},{},{},{},{},{},", p.dim, p.birth, death, b[0], b[1], b[2])?;
            match p.death_vertex {
                Some(v) => {
                    let d = grid.lattice().unravel(v);
                    writeln!(out, "{},{},{}", d[0], d[1], d[2])?;
                }
                None => writeln!(out, ",,")?,
            }
        }
        Ok(())
    }
}

/// `β_k(t)` for a diagram.
pub fn betti_at(diagram: &PersistenceDiagram, t: f64) -> [usize; 3] {
    diagram.betti_at(t)
}

/// Critical vertices of a pair, in lattice indices and space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalPoints {
    pub birth_index: [usize; 3],
    pub birth_point: Point,
    pub death_index: Option<[usize; 3]>,
    pub death_point: Option<Point>,
}

/// Locate each pair's birth and death vertices on the grid.
pub fn inverse_map(grid: &FilteredGrid, diagram: &PersistenceDiagram) -> Vec<CriticalPoints> {
    let lat = grid.lattice();
    diagram
        .pairs
        .iter()
        .map(|p| CriticalPoints {
            birth_index: lat.unravel(p.birth_vertex),
            birth_point: lat.point_at(p.birth_vertex),
            death_index: p.death_vertex.map(|v| lat.unravel(v)),
            death_point: p.death_vertex.map(|v| lat.point_at(v)),
        })
        .collect()
}
