use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{Aabb, Lattice};

/// Field samples on an inclusive vertex lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilteredGrid {
    lattice: Lattice,
    values: Vec<f64>,
}

impl FilteredGrid {
    /// Wrap precomputed samples; every value must be finite.
    pub fn from_values(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::domain(format!(
                "{} values for a lattice of {} points",
                values.len(),
                lattice.len()
            )));
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                value: values[idx],
                point: lattice.point_at(idx),
            });
        }
        Ok(FilteredGrid { lattice, values })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dims(&self) -> [usize; 3] {
        self.lattice.dims
    }

    pub fn bbox(&self) -> Aabb {
        self.lattice.bbox
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, ijk: [usize; 3]) -> f64 {
        self.values[self.lattice.linear(ijk)]
    }

    /// FNV-1a over the sample bits and dimensions.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for d in self.lattice.dims {
            feed(&(d as u64).to_le_bytes());
        }
        for v in &self.values {
            feed(&v.to_bits().to_le_bytes());
        }
        h
    }
}

/// Sample `phi` on the inclusive lattice of `resolution` points over `bbox`.
pub fn sample_field(phi: &ScalarField, bbox: Aabb, resolution: [usize; 3]) -> Result<FilteredGrid> {
    if resolution.iter().any(|&r| r < 2) {
        return Err(Error::domain(format!("resolution {resolution:?} needs at least 2 points per axis")));
    }
    let lattice = Lattice::new(bbox, resolution)?;
    let values: Vec<f64> = (0..lattice.len()).into_par_iter().map(|i| phi.eval(&lattice.point_at(i))).collect();
    FilteredGrid::from_values(lattice, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_linear_fields() {
        let c = sample_field(&ScalarField::constant(0.7, Aabb::unit()), Aabb::unit(), [3, 4, 5]).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.7));
        let x = sample_field(&ScalarField::new(Aabb::unit(), |p| p[0]), Aabb::unit(), [3, 3, 3]).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!([x.value([0, j, k]), x.value([1, j, k]), x.value([2, j, k])], [0.0, 0.5, 1.0]);
            }
        }
    }

    #[test]
    fn non_finite_sample_names_point() {
        let f = ScalarField::new(Aabb::unit(), |p| if p[0] > 0.9 { f64::NAN } else { 0.0 });
        match sample_field(&f, Aabb::unit(), [3, 3, 3]) {
            Err(Error::NonFinite { point, .. }) => assert_eq!(point[0], 1.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(sample_field(&f, Aabb::unit(), [1, 3, 3]).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = sample_field(&ScalarField::new(Aabb::unit(), |p| p[1]), Aabb::unit(), [4, 4, 4]).unwrap();
        let mut b = a.clone();
        assert_eq!(a.content_hash(), b.content_hash());
        b.values[5] += 1e-12;
        assert_ne!(a.content_hash(), b.content_hash());
    }
}
