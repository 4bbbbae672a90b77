//! B-spline bases, tensor-product volumes and constrained fitting.

mod knots;
mod lspia;
mod volume;

pub use knots::{KnotVector, MAX_DEGREE};
pub use lspia::{local_lspia_fit, FitDiagnostics, FitSettings};
pub use volume::{LocalBasis, SplineVolume};

/// A set of coefficient indices of a volume with the given counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    counts: [usize; 3],
    mask: Vec<bool>,
}

impl IndexSet {
    pub fn empty(counts: [usize; 3]) -> Self {
        IndexSet {
            counts,
            mask: vec![false; counts.iter().product()],
        }
    }

    pub fn full(counts: [usize; 3]) -> Self {
        IndexSet {
            counts,
            mask: vec![true; counts.iter().product()],
        }
    }

    pub fn from_mask(counts: [usize; 3], mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), counts.iter().product::<usize>(), "mask length mismatch");
        IndexSet { counts, mask }
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    /// Number of indices in the underlying coefficient array.
    pub fn len_total(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    fn flat(&self, ijk: [usize; 3]) -> usize {
        (ijk[0] * self.counts[1] + ijk[1]) * self.counts[2] + ijk[2]
    }

    pub fn contains(&self, ijk: [usize; 3]) -> bool {
        (0..3).all(|a| ijk[a] < self.counts[a]) && self.mask[self.flat(ijk)]
    }

    pub fn contains_flat(&self, idx: usize) -> bool {
        self.mask.get(idx).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, ijk: [usize; 3]) {
        let idx = self.flat(ijk);
        self.mask[idx] = true;
    }

    pub fn insert_flat(&mut self, idx: usize) {
        self.mask[idx] = true;
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Flat indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }
}
