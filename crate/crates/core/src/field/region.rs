use std::sync::Arc;

use super::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::{radial_distance, Aabb, Axis, Lattice, Point};
use crate::spatial::KdTree;

/// Implicit region `{p : f(p) ≤ 0}` with a bounding box of interest.
#[derive(Clone, Debug)]
pub struct Region {
    indicator: ScalarField,
}

impl Region {
    pub fn new(indicator: ScalarField) -> Self {
        Region { indicator }
    }

    pub fn from_fn(bbox: Aabb, f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Region::new(ScalarField::new(bbox, f))
    }

    pub fn empty(bbox: Aabb) -> Self {
        Region::new(ScalarField::constant(1.0, bbox))
    }

    pub fn aabb(b: Aabb) -> Self {
        Region::from_fn(b, move |p| {
            (0..3)
                .map(|a| (b.min[a] - p[a]).max(p[a] - b.max[a]))
                .fold(f64::NEG_INFINITY, f64::max)
        })
    }

    pub fn sphere(center: Point, radius: f64) -> Self {
        let bbox = Aabb::new(center.map(|c| c - radius), center.map(|c| c + radius));
        Region::from_fn(bbox, move |p| crate::geometry::distance(p, &center) - radius)
    }

    /// Finite cylinder around the line through `center` along `axis`,
    /// restricted to `range` in the axis coordinate.
    pub fn cylinder(axis: Axis, center: Point, radius: f64, range: (f64, f64)) -> Self {
        let a = axis.index();
        let mut min = center.map(|c| c - radius);
        let mut max = center.map(|c| c + radius);
        min[a] = range.0;
        max[a] = range.1;
        Region::from_fn(Aabb::new(min, max), move |p| {
            let r = radial_distance(p, a, &center);
            (r - radius).max(range.0 - p[a]).max(p[a] - range.1)
        })
    }

    /// `{p : n·p ≤ offset}`, with the supplied box as its extent of interest.
    pub fn half_space(normal: Point, offset: f64, bbox: Aabb) -> Result<Self> {
        let len = normal.iter().map(|n| n * n).sum::<f64>().sqrt();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::domain("half-space normal must be nonzero and finite"));
        }
        let n = normal.map(|c| c / len);
        let off = offset / len;
        Ok(Region::from_fn(bbox, move |p| n[0] * p[0] + n[1] * p[1] + n[2] * p[2] - off))
    }

    pub fn indicator(&self) -> &ScalarField {
        &self.indicator
    }

    pub fn bbox(&self) -> Aabb {
        self.indicator.bbox()
    }

    pub fn with_bbox(&self, bbox: Aabb) -> Self {
        Region::new(self.indicator.with_bbox(bbox))
    }

    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        self.indicator.eval(p) <= 0.0
    }

    pub fn union(&self, other: &Region) -> Region {
        Region::new(self.indicator.min(&other.indicator))
    }

    pub fn intersection(&self, other: &Region) -> Region {
        Region::new(self.indicator.max(&other.indicator).with_bbox(self.bbox()))
    }

    pub fn difference(&self, other: &Region) -> Region {
        let b = other.indicator.clone();
        Region::new(self.indicator.zip(&b, |x, y| x.max(-y)).with_bbox(self.bbox()))
    }

    /// Complement within the same box of interest.
    pub fn complement(&self) -> Region {
        Region::new(self.indicator.neg())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Neither,
    A,
    B,
    Both,
}

/// Points within `radius` of the interface between `a` and `b`.
///
/// The interface is located on `lattice`: a 6-neighbour pair with one point
/// only in `a` and the other only in `b` contributes its midpoint, and a
/// point in both regions next to a point in exactly one contributes itself.
pub fn dilate_region_boundary(a: &Region, b: &Region, radius: f64, lattice: &Lattice) -> Result<Region> {
    let side: Vec<Side> = lattice
        .points()
        .map(|p| match (a.contains(&p), b.contains(&p)) {
            (true, true) => Side::Both,
            (true, false) => Side::A,
            (false, true) => Side::B,
            (false, false) => Side::Neither,
        })
        .collect();
    let mut interface = Vec::new();
    for idx in 0..lattice.len() {
        let ijk = lattice.unravel(idx);
        for axis in 0..3 {
            if ijk[axis] + 1 >= lattice.dims[axis] {
                continue;
            }
            let mut nb = ijk;
            nb[axis] += 1;
            let jdx = lattice.linear(nb);
            let (p, q) = (lattice.point(ijk), lattice.point(nb));
            match (side[idx], side[jdx]) {
                (Side::A, Side::B) | (Side::B, Side::A) => {
                    interface.push(std::array::from_fn(|c| 0.5 * (p[c] + q[c])));
                }
                (Side::Both, Side::A | Side::B) => interface.push(p),
                (Side::A | Side::B, Side::Both) => interface.push(q),
                _ => {}
            }
        }
    }
    if interface.is_empty() {
        return Err(Error::domain("regions share no interface inside the sampling box"));
    }
    let tree = Arc::new(KdTree::build(interface));
    Ok(Region::from_fn(lattice.bbox, move |p| tree.nearest_distance(p) - radius))
}
