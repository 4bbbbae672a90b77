use super::{FilteredGrid, PersistenceDiagram, PersistencePair};

/// Which dimensions to compute beyond 0 and 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PersistenceOptions {
    /// Run the column reduction for dimension 1.
    pub dim1: bool,
}

impl Default for PersistenceOptions {
    fn default() -> Self {
        PersistenceOptions { dim1: true }
    }
}

/// Persistence pairs in dimensions 0, 1 and 2.
pub fn compute_persistence(grid: &FilteredGrid) -> PersistenceDiagram {
    compute_persistence_with(grid, PersistenceOptions::default())
}

/// Cells are ordered by `(max vertex rank, dimension, doubled-coordinate id)`,
/// where vertex rank sorts by `(value, linear index)`. A cell's critical
/// vertex is its maximal-rank vertex.
///
/// Dimension 0 uses union-find over edges in ascending order; dimension 2
/// uses union-find over voxels and the exterior with squares in descending
/// order; dimension 1 reduces the remaining square columns over Z/2, with
/// squares paired in dimension 2 cleared and rows of edges paired in
/// dimension 0 removed.
pub fn compute_persistence_with(grid: &FilteredGrid, opts: PersistenceOptions) -> PersistenceDiagram {
    let cx = Complex::new(grid);
    let mut pairs = Vec::new();

    let edges = cx.edges();
    let negative_edge = cx.dim0(&edges, &mut pairs);

    let squares = cx.squares();
    let cleared = cx.dim2(&squares, &mut pairs);

    if opts.dim1 {
        cx.dim1(&edges, &negative_edge, &squares, &cleared, &mut pairs);
    }
    pairs.sort_by_key(|p| p.dim);

    PersistenceDiagram {
        pairs,
        resolution: grid.dims(),
        field_hash: grid.content_hash(),
        dims: [true, opts.dim1, true],
    }
}

#[derive(Clone, Copy)]
struct Cell {
    key: u32,
    id: u32,
    anchor: u32,
    /// Edge direction, or the normal axis of a square.
    axis: u8,
}

struct Complex<'a> {
    values: &'a [f64],
    dims: [usize; 3],
    stride: [usize; 3],
    cdims: [usize; 3],
    order: Vec<u32>,
    rank: Vec<u32>,
}

impl<'a> Complex<'a> {
    fn new(grid: &'a FilteredGrid) -> Self {
        let values = grid.values();
        let dims = grid.dims();
        let n = values.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by(|&a, &b| values[a as usize].total_cmp(&values[b as usize]).then(a.cmp(&b)));
        let mut rank = vec![0u32; n];
        for (r, &v) in order.iter().enumerate() {
            rank[v as usize] = r as u32;
        }
        Complex {
            values,
            dims,
            stride: [1, dims[0], dims[0] * dims[1]],
            cdims: dims.map(|d| 2 * d - 1),
            order,
            rank,
        }
    }

    fn coords(&self, v: usize) -> [usize; 3] {
        [v % self.dims[0], (v / self.dims[0]) % self.dims[1], v / (self.dims[0] * self.dims[1])]
    }

    fn cell_id(&self, doubled: [usize; 3]) -> u32 {
        (doubled[0] + self.cdims[0] * (doubled[1] + self.cdims[1] * doubled[2])) as u32
    }

    fn vertex_at_key(&self, key: u32) -> usize {
        self.order[key as usize] as usize
    }

    fn value_at_key(&self, key: u32) -> f64 {
        self.values[self.vertex_at_key(key)]
    }

    fn edges(&self) -> Vec<Cell> {
        let n = self.values.len();
        let mut edges = Vec::with_capacity(3 * n);
        for v in 0..n {
            let c = self.coords(v);
            for a in 0..3 {
                if c[a] + 1 < self.dims[a] {
                    let w = v + self.stride[a];
                    let mut d = c.map(|x| 2 * x);
                    d[a] += 1;
                    edges.push(Cell {
                        key: self.rank[v].max(self.rank[w]),
                        id: self.cell_id(d),
                        anchor: v as u32,
                        axis: a as u8,
                    });
                }
            }
        }
        edges.sort_unstable_by_key(|e| (e.key, e.id));
        edges
    }

    fn squares(&self) -> Vec<Cell> {
        let n = self.values.len();
        let mut squares = Vec::with_capacity(3 * n);
        for v in 0..n {
            let c = self.coords(v);
            for normal in 0..3 {
                let (a, b) = ((normal + 1) % 3, (normal + 2) % 3);
                if c[a] + 1 < self.dims[a] && c[b] + 1 < self.dims[b] {
                    let (sa, sb) = (self.stride[a], self.stride[b]);
                    let key = self.rank[v].max(self.rank[v + sa]).max(self.rank[v + sb]).max(self.rank[v + sa + sb]);
                    let mut d = c.map(|x| 2 * x);
                    d[a] += 1;
                    d[b] += 1;
                    squares.push(Cell {
                        key,
                        id: self.cell_id(d),
                        anchor: v as u32,
                        axis: normal as u8,
                    });
                }
            }
        }
        squares.sort_unstable_by_key(|s| (s.key, s.id));
        squares
    }

    fn push_pair(&self, pairs: &mut Vec<PersistencePair>, dim: usize, birth_key: u32, death_key: Option<u32>) {
        let birth = self.value_at_key(birth_key);
        let death = death_key.map_or(f64::INFINITY, |k| self.value_at_key(k));
        if birth == death {
            return;
        }
        pairs.push(PersistencePair {
            dim,
            birth,
            death,
            birth_vertex: self.vertex_at_key(birth_key),
            death_vertex: death_key.map(|k| self.vertex_at_key(k)),
        });
    }

    /// Returns, per sorted edge, whether it merged two components.
    fn dim0(&self, edges: &[Cell], pairs: &mut Vec<PersistencePair>) -> Vec<bool> {
        let n = self.values.len();
        let mut uf = UnionFind::new(n);
        // Oldest vertex rank of each component.
        let oldest: Vec<u32> = self.rank.clone();
        let mut negative = vec![false; edges.len()];
        for (pos, e) in edges.iter().enumerate() {
            let v = e.anchor as usize;
            let w = v + self.stride[e.axis as usize];
            let (rv, rw) = (uf.find(v), uf.find(w));
            if rv == rw {
                continue;
            }
            let (older, younger) = if oldest[rv] < oldest[rw] { (rv, rw) } else { (rw, rv) };
            self.push_pair(pairs, 0, oldest[younger], Some(e.key));
            uf.parent[younger] = older as u32;
            negative[pos] = true;
        }
        if n > 0 {
            self.push_pair(pairs, 0, 0, None);
        }
        negative
    }

    fn voxel_index(&self, v: usize) -> Option<usize> {
        let c = self.coords(v);
        if (0..3).all(|a| c[a] + 1 < self.dims[a]) {
            Some(c[0] + (self.dims[0] - 1) * (c[1] + (self.dims[1] - 1) * c[2]))
        } else {
            None
        }
    }

    /// Returns, per sorted square, whether it was paired with a voxel.
    fn dim2(&self, squares: &[Cell], pairs: &mut Vec<PersistencePair>) -> Vec<bool> {
        let vd = self.dims.map(|d| d.saturating_sub(1));
        let n_vox = vd[0] * vd[1] * vd[2];
        let exterior = n_vox;
        let mut oldest: Vec<(u32, u32)> = vec![(u32::MAX, u32::MAX); n_vox + 1];
        if n_vox > 0 {
            for k in 0..vd[2] {
                for j in 0..vd[1] {
                    for i in 0..vd[0] {
                        let v = i + self.stride[1] * j + self.stride[2] * k;
                        let mut key = 0;
                        for corner in 0..8 {
                            let w = v
                                + (corner & 1) * self.stride[0]
                                + ((corner >> 1) & 1) * self.stride[1]
                                + ((corner >> 2) & 1) * self.stride[2];
                            key = key.max(self.rank[w]);
                        }
                        let d = [2 * i + 1, 2 * j + 1, 2 * k + 1];
                        oldest[i + vd[0] * (j + vd[1] * k)] = (key, self.cell_id(d));
                    }
                }
            }
        }
        let mut uf = UnionFind::new(n_vox + 1);
        let mut cleared = vec![false; squares.len()];
        for (pos, s) in squares.iter().enumerate().rev() {
            let v = s.anchor as usize;
            let c = self.coords(v);
            let normal = s.axis as usize;
            let below = if c[normal] >= 1 {
                self.voxel_index(v - self.stride[normal])
            } else {
                None
            };
            let above = self.voxel_index(v).filter(|_| c[normal] + 1 < self.dims[normal]);
            let (ra, rb) = (uf.find(below.unwrap_or(exterior)), uf.find(above.unwrap_or(exterior)));
            if ra == rb {
                continue;
            }
            let (older, younger) = if oldest[ra] > oldest[rb] { (ra, rb) } else { (rb, ra) };
            self.push_pair(pairs, 2, s.key, Some(oldest[younger].0));
            uf.parent[younger] = older as u32;
            cleared[pos] = true;
        }
        cleared
    }

    fn dim1(
        &self,
        edges: &[Cell],
        negative_edge: &[bool],
        squares: &[Cell],
        cleared: &[bool],
        pairs: &mut Vec<PersistencePair>,
    ) {
        let n = self.values.len();
        let mut edge_pos = vec![u32::MAX; 3 * n];
        for (pos, e) in edges.iter().enumerate() {
            edge_pos[3 * e.anchor as usize + e.axis as usize] = pos as u32;
        }
        let mut pivot_owner = vec![u32::MAX; edges.len()];
        let mut stored: Vec<Vec<u32>> = Vec::new();
        let mut col: Vec<u32> = Vec::with_capacity(8);
        let mut scratch: Vec<u32> = Vec::with_capacity(8);
        for (pos, s) in squares.iter().enumerate() {
            if cleared[pos] {
                continue;
            }
            let v = s.anchor as usize;
            let normal = s.axis as usize;
            let (a, b) = ((normal + 1) % 3, (normal + 2) % 3);
            col.clear();
            for (base, axis) in [(v, a), (v, b), (v + self.stride[b], a), (v + self.stride[a], b)] {
                let e = edge_pos[3 * base + axis];
                if !negative_edge[e as usize] {
                    col.push(e);
                }
            }
            col.sort_unstable();
            while let Some(&low) = col.last() {
                let owner = pivot_owner[low as usize];
                if owner == u32::MAX {
                    pivot_owner[low as usize] = stored.len() as u32;
                    stored.push(col.clone());
                    self.push_pair(pairs, 1, edges[low as usize].key, Some(s.key));
                    break;
                }
                symmetric_difference(&col, &stored[owner as usize], &mut scratch);
                std::mem::swap(&mut col, &mut scratch);
            }
        }
    }
}

fn symmetric_difference(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Aabb, Lattice};

    fn grid2d(rows_top_down: &[&[f64]]) -> FilteredGrid {
        let ny = rows_top_down.len();
        let nx = rows_top_down[0].len();
        let mut values = vec![0.0; nx * ny];
        for (r, row) in rows_top_down.iter().enumerate() {
            let y = ny - 1 - r;
            for (x, &v) in row.iter().enumerate() {
                values[x + nx * y] = v;
            }
        }
        let lat = Lattice::new(Aabb::new([0.0; 3], [nx as f64 - 1.0, ny as f64 - 1.0, 0.0]), [nx, ny, 1]).unwrap();
        FilteredGrid::from_values(lat, values).unwrap()
    }

    fn sorted(pairs: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
        let mut v: Vec<_> = pairs.collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        v
    }

    #[test]
    fn worked_example() {
        let g = grid2d(&[
            &[0., 0., 0., 1., 0., 0., 0., 2., 0.],
            &[1., 3., 0., 2., 0., 3., 2., 2., 0.],
            &[0., 0., 0., 2., 0., 0., 0., 2., 0.],
        ]);
        let d = compute_persistence(&g);
        let d0 = sorted(d.in_dim(0).map(|p| (p.birth, p.death)));
        assert_eq!(d0, vec![(0.0, 1.0), (0.0, 2.0), (0.0, f64::INFINITY)]);
        let d1 = sorted(d.in_dim(1).map(|p| (p.birth, p.death)));
        assert_eq!(d1, vec![(1.0, 3.0), (2.0, 3.0)]);
        assert_eq!(d.in_dim(2).count(), 0);
        assert_eq!(d.betti_at(2.0), [1, 2, 0]);
        let loop1 = d.in_dim(1).find(|p| p.birth == 1.0).unwrap();
        assert_eq!(g.lattice().unravel(loop1.birth_vertex), [0, 1, 0]);
        for p in &d.pairs {
            assert_eq!(g.values()[p.birth_vertex], p.birth);
            if let Some(v) = p.death_vertex {
                assert_eq!(g.values()[v], p.death);
            }
        }
    }

    #[test]
    fn constant_grid_has_one_class() {
        let lat = Lattice::new(Aabb::unit(), [4, 3, 5]).unwrap();
        let g = FilteredGrid::from_values(lat, vec![0.25; 60]).unwrap();
        let d = compute_persistence(&g);
        assert_eq!(d.pairs.len(), 1);
        assert_eq!(d.pairs[0].birth, 0.25);
        assert!(d.pairs[0].is_essential());
        assert_eq!(d.pairs[0].birth_vertex, 0);
    }

    #[test]
    fn hollow_cube_has_a_void() {
        let lat = Lattice::new(Aabb::unit(), [5, 5, 5]).unwrap();
        let values: Vec<f64> = (0..125)
            .map(|i| {
                let c = lat.unravel(i);
                if c == [2, 2, 2] {
                    5.0
                } else {
                    0.0
                }
            })
            .collect();
        let g = FilteredGrid::from_values(lat, values).unwrap();
        let d = compute_persistence(&g);
        let d2: Vec<_> = d.in_dim(2).collect();
        assert_eq!(d2.len(), 1);
        assert_eq!((d2[0].birth, d2[0].death), (0.0, 5.0));
        assert_eq!(d2[0].death_vertex, Some(lat.linear([2, 2, 2])));
        assert_eq!(d.betti_at(0.0), [1, 0, 1]);
    }

    #[test]
    fn symmetric_difference_merges() {
        let mut out = Vec::new();
        symmetric_difference(&[1, 3, 5, 7], &[3, 4, 7, 9], &mut out);
        assert_eq!(out, vec![1, 4, 5, 9]);
    }
}
