//! Topological loss on persistence diagrams and the adaptive-gradient repair
//! loop that drives it to zero.

mod descent;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use descent::{optimize, OptimizeReport, OptimizeSettings, RepairProblem};

use crate::field::{Region, ScalarField};
use crate::init::WeightFunction;
use crate::spline::IndexSet;
use crate::topology::{FilteredGrid, PersistenceDiagram, PersistencePair};

/// Position of a pair relative to the lines `b = 0`, `d = 0` and `d = -b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionClass {
    /// Born above the iso-level.
    I,
    /// Straddles zero and lives longer above it than below.
    II,
    /// Straddles zero and lives longer below it.
    III,
    /// Dies at or below the iso-level.
    IV,
    Essential,
    /// Zero or negative persistence.
    Irrelevant,
}

impl RegionClass {
    /// Only these classes describe isolated pieces at the iso-level.
    pub fn is_selected(self) -> bool {
        matches!(self, RegionClass::II | RegionClass::III)
    }
}

pub fn classify_pair(p: &PersistencePair) -> RegionClass {
    if p.is_essential() {
        RegionClass::Essential
    } else if p.birth >= p.death {
        RegionClass::Irrelevant
    } else if p.birth > 0.0 {
        RegionClass::I
    } else if p.death <= 0.0 {
        RegionClass::IV
    } else if p.death >= -p.birth {
        RegionClass::II
    } else {
        RegionClass::III
    }
}

/// The pair itself when both critical vertices lie in `br`, else the zero
/// pair `(0, 0)`. Essential pairs always map to the zero pair.
pub fn filter_by_br(pair: &PersistencePair, grid: &FilteredGrid, br: &Region) -> PersistencePair {
    let lat = grid.lattice();
    keep_or_zero(pair, |v| br.contains(&lat.point_at(v)))
}

fn keep_or_zero(pair: &PersistencePair, inside: impl Fn(usize) -> bool) -> PersistencePair {
    match pair.death_vertex {
        Some(d) if inside(pair.birth_vertex) && inside(d) => *pair,
        _ => PersistencePair {
            birth: 0.0,
            death: 0.0,
            ..*pair
        },
    }
}

/// One selected pair's share of the loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    /// Index into the diagram's pair list.
    pub pair: usize,
    pub dim: usize,
    pub class: RegionClass,
    /// `+1` when the death value enters the loss, `-1` for the birth value.
    pub sign: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub contributions: Vec<Contribution>,
    /// Selected region-II pairs per dimension.
    pub n_ii: [usize; 3],
    /// Selected region-III pairs per dimension.
    pub n_iii: [usize; 3],
}

/// Sum of `-b` over region-II pairs and `d` over region-III pairs in
/// dimensions 0 and 2, after filtering to `br`.
pub fn loss(diagram: &PersistenceDiagram, grid: &FilteredGrid, br: &Region) -> LossBreakdown {
    let lat = grid.lattice();
    loss_with(diagram, |v| br.contains(&lat.point_at(v)))
}

pub(crate) fn loss_with(diagram: &PersistenceDiagram, inside: impl Fn(usize) -> bool) -> LossBreakdown {
    let mut out = LossBreakdown::default();
    for (idx, pair) in diagram.pairs.iter().enumerate() {
        if pair.dim == 1 {
            continue;
        }
        let p = keep_or_zero(pair, &inside);
        let class = classify_pair(&p);
        let (sign, value) = match class {
            RegionClass::II => {
                out.n_ii[p.dim] += 1;
                (-1.0, -p.birth)
            }
            RegionClass::III => {
                out.n_iii[p.dim] += 1;
                (1.0, p.death)
            }
            _ => continue,
        };
        out.total += value;
        out.contributions.push(Contribution {
            pair: idx,
            dim: p.dim,
            class,
            sign,
            value,
        });
    }
    out
}

/// Sparse gradient keyed by flat coefficient index.
pub type Gradient = BTreeMap<usize, f64>;

/// Gradient of the loss with respect to the free coefficients of `omega`,
/// holding each critical vertex fixed. A selected pair's critical value is
/// `φ(ξ) = (1 - ω(ξ))·left(ξ) + ω(ξ)·right(ξ)`, so its derivative with
/// respect to a coefficient is that basis function at `ξ` times
/// `right(ξ) - left(ξ)`.
pub fn loss_gradient(
    diagram: &PersistenceDiagram,
    grid: &FilteredGrid,
    omega: &WeightFunction,
    left: &ScalarField,
    right: &ScalarField,
    br: &Region,
    fixed: &IndexSet,
) -> Gradient {
    let lat = grid.lattice();
    let breakdown = loss(diagram, grid, br);
    let mut grad = Gradient::new();
    for c in &breakdown.contributions {
        let pair = &diagram.pairs[c.pair];
        let vertex = if c.sign > 0.0 {
            pair.death_vertex.expect("selected pairs are finite")
        } else {
            pair.birth_vertex
        };
        let xi = lat.point_at(vertex);
        let jump = right.eval(&xi) - left.eval(&xi);
        for (idx, w) in omega.basis_weights(&xi) {
            if !fixed.contains_flat(idx) && w != 0.0 {
                *grad.entry(idx).or_insert(0.0) += c.sign * w * jump;
            }
        }
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Aabb, Lattice};

    fn pair(dim: usize, birth: f64, death: f64) -> PersistencePair {
        PersistencePair {
            dim,
            birth,
            death,
            birth_vertex: 0,
            death_vertex: (death.is_finite()).then_some(1),
        }
    }

    fn diagram(pairs: Vec<PersistencePair>) -> PersistenceDiagram {
        PersistenceDiagram {
            pairs,
            resolution: [2, 1, 1],
            field_hash: 0,
            dims: [true, true, true],
        }
    }

    #[test]
    fn classification() {
        assert_eq!(classify_pair(&pair(0, -0.5, 0.7)), RegionClass::II);
        assert_eq!(classify_pair(&pair(0, -0.7, 0.3)), RegionClass::III);
        assert_eq!(classify_pair(&pair(0, 0.2, 0.5)), RegionClass::I);
        assert_eq!(classify_pair(&pair(0, -0.9, -0.1)), RegionClass::IV);
        assert_eq!(classify_pair(&pair(0, -0.9, f64::INFINITY)), RegionClass::Essential);
        assert_eq!(classify_pair(&pair(0, 0.0, 0.0)), RegionClass::Irrelevant);
        assert_eq!(classify_pair(&pair(0, -0.4, 0.4)), RegionClass::II);
        assert_eq!(classify_pair(&pair(0, 0.0, 0.4)), RegionClass::II);
    }

    #[test]
    fn filtering_by_region() {
        let lat = Lattice::new(Aabb::new([0.0; 3], [1.0, 0.0, 0.0]), [2, 1, 1]).unwrap();
        let grid = FilteredGrid::from_values(lat, vec![0.0, 1.0]).unwrap();
        let everywhere = Region::aabb(Aabb::new([-1.0; 3], [2.0; 3]));
        let left_only = Region::aabb(Aabb::new([-1.0; 3], [0.5, 1.0, 1.0]));
        let p = pair(0, -0.2, 0.1);
        assert_eq!(filter_by_br(&p, &grid, &everywhere), p);
        let z = filter_by_br(&p, &grid, &left_only);
        assert_eq!((z.birth, z.death), (0.0, 0.0));
        let e = filter_by_br(&pair(0, -0.2, f64::INFINITY), &grid, &everywhere);
        assert_eq!((e.birth, e.death), (0.0, 0.0));
    }

    #[test]
    fn loss_examples() {
        let lat = Lattice::new(Aabb::new([0.0; 3], [1.0, 0.0, 0.0]), [2, 1, 1]).unwrap();
        let grid = FilteredGrid::from_values(lat, vec![0.0, 1.0]).unwrap();
        let br = Region::aabb(Aabb::new([-1.0; 3], [2.0; 3]));
        assert_eq!(loss(&diagram(vec![]), &grid, &br).total, 0.0);
        let l = loss(&diagram(vec![pair(0, -0.2, 0.1)]), &grid, &br);
        assert_eq!(l.total, 0.1);
        assert_eq!(l.n_iii, [1, 0, 0]);
        let l = loss(&diagram(vec![pair(2, -0.3, 0.5)]), &grid, &br);
        assert_eq!(l.total, 0.3);
        assert_eq!(l.n_ii, [0, 0, 1]);
        let l = loss(&diagram(vec![pair(1, -0.3, 0.5), pair(0, 0.2, 0.5), pair(0, -1.0, f64::INFINITY)]), &grid, &br);
        assert_eq!(l.total, 0.0);
        assert!(l.contributions.is_empty());
    }
}
