use rayon::prelude::*;

use super::{ParamMap, WeightFunction};
use crate::field::Region;
use crate::geometry::{Aabb, Lattice, Point};
use crate::spline::{IndexSet, KnotVector, SplineVolume};

pub(crate) const IN_ER1: u8 = 1;
pub(crate) const IN_ER2: u8 = 2;
pub(crate) const IN_BR: u8 = 4;

/// Region membership of every point of a classification lattice.
pub(crate) struct Classified {
    pub lattice: Lattice,
    pub points: Vec<Point>,
    pub flags: Vec<u8>,
}

impl Classified {
    pub fn new(er1: &Region, er2: &Region, br: &Region, lattice: Lattice) -> Self {
        let points: Vec<Point> = lattice.points().collect();
        let flags = points
            .par_iter()
            .map(|p| {
                let mut f = 0;
                if er1.contains(p) {
                    f |= IN_ER1;
                }
                if er2.contains(p) {
                    f |= IN_ER2;
                }
                if br.contains(p) {
                    f |= IN_BR;
                }
                f
            })
            .collect();
        Classified { lattice, points, flags }
    }

    pub fn select(&self, pred: impl Fn(u8) -> bool) -> impl Iterator<Item = &Point> {
        self.points.iter().zip(&self.flags).filter(move |(_, &f)| pred(f)).map(|(p, _)| p)
    }
}

pub(crate) fn cube_lattice(bbox: &Aabb, grid: usize) -> crate::error::Result<Lattice> {
    Lattice::new(*bbox, [grid; 3])
}

/// Inclusive range of basis indices whose support, widened by `pad` on both
/// sides, contains `u`.
fn touching(kv: &KnotVector, u: f64, pad: f64) -> (usize, usize) {
    let n = kv.basis_count();
    if n == 1 {
        return (0, 0);
    }
    let k = kv.knots();
    let p = kv.degree();
    let hi = k.partition_point(|&x| x <= u + pad).saturating_sub(1).min(n - 1);
    let lo = k.partition_point(|&x| x < u - pad).saturating_sub(p + 1).min(n - 1);
    (lo, hi.max(lo))
}

/// Coefficients whose widened support contains the parameter of any point.
pub(crate) fn mark<'a>(
    spline: &SplineVolume,
    map: &ParamMap,
    pad: [f64; 3],
    points: impl Iterator<Item = &'a Point>,
) -> IndexSet {
    let counts = spline.counts();
    let mut set = IndexSet::empty(counts);
    for p in points {
        let u = map.param(p);
        let r: [(usize, usize); 3] = std::array::from_fn(|a| touching(spline.knots(a), u[a], pad[a]));
        for i in r[0].0..=r[0].1 {
            for j in r[1].0..=r[1].1 {
                for k in r[2].0..=r[2].1 {
                    set.insert([i, j, k]);
                }
            }
        }
    }
    set
}

/// Indices whose basis is nonzero somewhere outside `br`, found by sampling
/// `lattice` and widening each support by one lattice step.
pub fn fixed_index_set(omega: &WeightFunction, br: &Region, lattice: &Lattice) -> IndexSet {
    let outside: Vec<Point> = lattice.points().filter(|p| !br.contains(p)).collect();
    let pad = omega.map.param_spacing(lattice);
    mark(&omega.spline, &omega.map, pad, outside.iter())
}
