use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, radial_distance, Aabb, Axis, Lattice, Point};
use crate::spline::{LocalBasis, SplineVolume};

/// Scalar coordinate a one-dimensional weight varies along.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoordinateFrame {
    Cartesian { axis: Axis },
    /// Distance to the line through `center` parallel to `axis`.
    Cylindrical { axis: Axis, center: Point },
    /// Distance to `center`.
    Spherical { center: Point },
}

impl CoordinateFrame {
    pub fn validate(&self) -> Result<()> {
        let finite = match self {
            CoordinateFrame::Cartesian { .. } => true,
            CoordinateFrame::Cylindrical { center, .. } | CoordinateFrame::Spherical { center } => {
                center.iter().all(|c| c.is_finite())
            }
        };
        if finite {
            Ok(())
        } else {
            Err(Error::domain("frame center must be finite"))
        }
    }

    pub fn coordinate(&self, p: &Point) -> f64 {
        match *self {
            CoordinateFrame::Cartesian { axis } => p[axis.index()],
            CoordinateFrame::Cylindrical { axis, center } => radial_distance(p, axis.index(), &center),
            CoordinateFrame::Spherical { center } => distance(p, &center),
        }
    }

    /// Range of the coordinate over a box.
    pub fn range(&self, bbox: &Aabb) -> (f64, f64) {
        match *self {
            CoordinateFrame::Cartesian { axis } => (bbox.min[axis.index()], bbox.max[axis.index()]),
            CoordinateFrame::Cylindrical { axis, center } => {
                let a = axis.index();
                let mut nearest = bbox.clamp(&center);
                nearest[a] = center[a];
                let lo = radial_distance(&nearest, a, &center);
                let hi = bbox
                    .corners()
                    .iter()
                    .map(|c| radial_distance(c, a, &center))
                    .fold(0.0, f64::max);
                (lo, hi)
            }
            CoordinateFrame::Spherical { center } => {
                let lo = distance(&bbox.clamp(&center), &center);
                let hi = bbox.corners().iter().map(|c| distance(c, &center)).fold(0.0, f64::max);
                (lo, hi)
            }
        }
    }
}

/// Map from physical space to the spline's unit parameter box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamMap {
    /// Axis-aligned affine map of the box onto `[0,1]³`.
    Unit { bbox: Aabb },
    /// `u = (t - lo) / (hi - lo)` for the frame coordinate `t`; `v = w = 0`.
    Frame { frame: CoordinateFrame, lo: f64, hi: f64 },
}

impl ParamMap {
    pub fn unit(bbox: Aabb) -> Result<Self> {
        if bbox.is_degenerate() {
            return Err(Error::domain(format!("degenerate box {bbox:?}")));
        }
        Ok(ParamMap::Unit { bbox })
    }

    pub fn frame(frame: CoordinateFrame, bbox: &Aabb) -> Result<Self> {
        frame.validate()?;
        let (lo, hi) = frame.range(bbox);
        if !(hi > lo) {
            return Err(Error::domain(format!("frame coordinate is constant over {bbox:?}")));
        }
        Ok(ParamMap::Frame { frame, lo, hi })
    }

    /// Parameter of `p`, clamped into the unit box.
    #[inline]
    pub fn param(&self, p: &Point) -> [f64; 3] {
        match self {
            ParamMap::Unit { bbox } => std::array::from_fn(|a| ((p[a] - bbox.min[a]) / bbox.extent(a)).clamp(0.0, 1.0)),
            ParamMap::Frame { frame, lo, hi } => [((frame.coordinate(p) - lo) / (hi - lo)).clamp(0.0, 1.0), 0.0, 0.0],
        }
    }

    /// Upper bound on how far the parameter moves between neighbouring
    /// points of `lattice`, per parameter axis.
    pub fn param_spacing(&self, lattice: &Lattice) -> [f64; 3] {
        match self {
            ParamMap::Unit { bbox } => std::array::from_fn(|a| lattice.spacing(a) / bbox.extent(a)),
            ParamMap::Frame { frame, lo, hi } => {
                let moving = |a: usize| match frame {
                    CoordinateFrame::Cartesian { axis } => a == axis.index(),
                    CoordinateFrame::Cylindrical { axis, .. } => a != axis.index(),
                    CoordinateFrame::Spherical { .. } => true,
                };
                let step = (0..3).filter(|&a| moving(a)).map(|a| lattice.spacing(a)).fold(0.0, f64::max);
                [step / (hi - lo), 0.0, 0.0]
            }
        }
    }
}

/// A spline weight ω composed with its parameter map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub spline: SplineVolume,
    pub map: ParamMap,
}

impl WeightFunction {
    pub fn new(spline: SplineVolume, map: ParamMap) -> Self {
        WeightFunction { spline, map }
    }

    #[inline]
    pub fn eval(&self, p: &Point) -> f64 {
        self.spline.eval_unchecked(self.map.param(p))
    }

    pub fn local_basis(&self, p: &Point) -> LocalBasis {
        self.spline.local_basis_unchecked(self.map.param(p))
    }

    /// `(coefficient, basis value)` pairs of the bases supporting `p`.
    pub fn basis_weights(&self, p: &Point) -> Vec<(usize, f64)> {
        let lb = self.local_basis(p);
        let mut out = Vec::with_capacity(lb.order.iter().product());
        self.spline.for_each_weight(&lb, |idx, w| {
            if w != 0.0 {
                out.push((idx, w));
            }
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_map_is_affine() {
        let map = ParamMap::unit(Aabb::new([0.0; 3], [1.0, 0.25, 0.25])).unwrap();
        assert_eq!(map.param(&[0.5, 0.125, 0.25]), [0.5, 0.5, 1.0]);
        assert_eq!(map.param(&[2.0, -1.0, 0.0]), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn frame_ranges() {
        let bbox = Aabb::new([-1.0, -1.0, 0.0], [1.0, 1.0, 1.0]);
        let cyl = CoordinateFrame::Cylindrical {
            axis: Axis::Z,
            center: [0.0; 3],
        };
        let (lo, hi) = cyl.range(&bbox);
        assert_eq!(lo, 0.0);
        assert!((hi - 2f64.sqrt()).abs() < 1e-15);
        let sph = CoordinateFrame::Spherical { center: [3.0, 0.0, 0.5] };
        let (lo, _) = sph.range(&bbox);
        assert!((lo - 2.0).abs() < 1e-15);
        assert!(ParamMap::unit(Aabb::new([0.0; 3], [1.0, 0.0, 1.0])).is_err());
    }
}
