//! Axis-aligned boxes and uniform sampling lattices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 3];

/// Coordinate axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Axis::ALL.get(i).copied()
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn new(min: Point, max: Point) -> Self {
        Aabb { min, max }
    }

    pub fn unit() -> Self {
        Aabb::new([0.0; 3], [1.0; 3])
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn center(&self) -> Point {
        std::array::from_fn(|a| 0.5 * (self.min[a] + self.max[a]))
    }

    pub fn diagonal(&self) -> f64 {
        (0..3).map(|a| self.extent(a).powi(2)).sum::<f64>().sqrt()
    }

    /// True when some axis has zero or negative (or non-finite) extent.
    pub fn is_degenerate(&self) -> bool {
        (0..3).any(|a| !(self.extent(a) > 0.0) || !self.extent(a).is_finite())
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb::new(
            std::array::from_fn(|a| self.min[a].min(other.min[a])),
            std::array::from_fn(|a| self.max[a].max(other.max[a])),
        )
    }

    /// Closest point of the box to `p`.
    pub fn clamp(&self, p: &Point) -> Point {
        std::array::from_fn(|a| p[a].clamp(self.min[a], self.max[a]))
    }

    pub fn corners(&self) -> [Point; 8] {
        std::array::from_fn(|c| {
            std::array::from_fn(|a| {
                if (c >> a) & 1 == 0 {
                    self.min[a]
                } else {
                    self.max[a]
                }
            })
        })
    }
}

/// Uniform lattice of `dims` points spanning `bbox` inclusively.
///
/// An axis with a single point sits at the box minimum. Linear indices run
/// x-fastest: `i + nx * (j + ny * k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub bbox: Aabb,
    pub dims: [usize; 3],
}

impl Lattice {
    pub fn new(bbox: Aabb, dims: [usize; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::domain(format!("lattice dims {dims:?} must be positive")));
        }
        Ok(Lattice { bbox, dims })
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distance between neighbouring points along `axis` (0 for a single-point axis).
    pub fn spacing(&self, axis: usize) -> f64 {
        if self.dims[axis] < 2 {
            0.0
        } else {
            self.bbox.extent(axis) / (self.dims[axis] - 1) as f64
        }
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        if self.dims[axis] < 2 {
            self.bbox.min[axis]
        } else if i + 1 == self.dims[axis] {
            self.bbox.max[axis]
        } else {
            self.bbox.min[axis] + i as f64 * self.spacing(axis)
        }
    }

    pub fn point(&self, ijk: [usize; 3]) -> Point {
        std::array::from_fn(|a| self.coordinate(a, ijk[a]))
    }

    pub fn linear(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.dims[0] * (ijk[1] + self.dims[1] * ijk[2])
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    pub fn point_at(&self, idx: usize) -> Point {
        self.point(self.unravel(idx))
    }

    /// All lattice points in linear order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |idx| self.point_at(idx))
    }
}

pub(crate) fn distance(a: &Point, b: &Point) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Distance from `p` to the line through `center` parallel to `axis`.
pub(crate) fn radial_distance(p: &Point, axis: usize, center: &Point) -> f64 {
    (0..3)
        .filter(|&i| i != axis)
        .map(|i| (p[i] - center[i]).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn squared_distance(a: &Point, b: &Point) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}
