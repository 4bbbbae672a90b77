//! Fixtures shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use topoblend::field::{blended_field, normalize_spec, tpms, PorousKind, PorousSpec, Region, ScalarField, TpmsKind};
use topoblend::init::{ParamMap, WeightFunction};
use topoblend::optimize::{loss, loss_gradient, LossBreakdown};
use topoblend::spline::{IndexSet, KnotVector, SplineVolume};
use topoblend::topology::{compute_persistence, sample_field, FilteredGrid, PersistenceDiagram};
use topoblend::{Aabb, Lattice};

/// A few random low-frequency cosine modes on the unit box.
pub fn smooth_field(rng: &mut ChaCha8Rng) -> ScalarField {
    let modes: Vec<([f64; 3], f64, f64)> = (0..6)
        .map(|_| {
            let k = std::array::from_fn(|_| rng.random_range(-4.0..4.0));
            (k, rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.2..1.0))
        })
        .collect();
    ScalarField::new(Aabb::unit(), move |p| {
        modes
            .iter()
            .map(|(k, phase, amp)| amp * (6.0 * (k[0] * p[0] + k[1] * p[1] + k[2] * p[2]) + phase).cos())
            .sum()
    })
}

/// Four sample values plus the iso-level.
pub fn thresholds(grid: &FilteredGrid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v = grid.values();
    let mut t: Vec<f64> = (0..4).map(|_| v[rng.random_range(0..v.len())]).collect();
    t.push(0.0);
    t
}

/// The 9×3 planar grid whose diagram is worked out by hand.
pub fn worked_example() -> FilteredGrid {
    let rows: [[f64; 9]; 3] = [
        [0., 0., 0., 1., 0., 0., 0., 2., 0.],
        [1., 3., 0., 2., 0., 3., 2., 2., 0.],
        [0., 0., 0., 2., 0., 0., 0., 2., 0.],
    ];
    let lattice = Lattice::new(Aabb::new([0.0; 3], [8.0, 2.0, 0.0]), [9, 3, 1]).unwrap();
    let mut values = vec![0.0; 27];
    for (j, row) in rows.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            values[lattice.linear([i, j, 0])] = *v;
        }
    }
    FilteredGrid::from_values(lattice, values).unwrap()
}

pub fn sorted_pairs(d: &PersistenceDiagram, dim: usize) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = d.in_dim(dim).map(|p| (p.birth, p.death)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    v
}

pub const GRADIENT_RES: [usize; 3] = [20, 20, 20];

/// A random weight between a rod and a sheet, repaired inside a centered box.
pub struct GradientSetup {
    pub omega: WeightFunction,
    pub left: ScalarField,
    pub right: ScalarField,
    pub br: Region,
}

pub struct Evaluation {
    pub diagram: PersistenceDiagram,
    pub loss: LossBreakdown,
    pub grid: FilteredGrid,
}

impl GradientSetup {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let knots = std::array::from_fn(|_| KnotVector::clamped_uniform(3, 6, 0.0, 1.0).unwrap());
        let coefficients = (0..216).map(|_| rng.random_range(0.0..1.0)).collect();
        let spline = SplineVolume::new(knots, coefficients).unwrap();
        let omega = WeightFunction::new(spline, ParamMap::unit(Aabb::unit()).unwrap());
        let left = normalize_spec(&PorousSpec::with_constants(
            PorousKind::Rod,
            tpms(TpmsKind::P, [rng.random_range(1.0..3.0); 3]).unwrap(),
            rng.random_range(-0.5..0.5),
            0.0,
        ));
        let right = normalize_spec(&PorousSpec::with_constants(
            PorousKind::Sheet,
            tpms(TpmsKind::G, [rng.random_range(1.0..3.0); 3]).unwrap(),
            -0.6,
            0.6,
        ));
        let lo = rng.random_range(0.1..0.3);
        let br = Region::aabb(Aabb::new([lo; 3], [1.0 - lo; 3]));
        GradientSetup { omega, left, right, br }
    }

    pub fn with_coefficient(&self, idx: usize, delta: f64) -> WeightFunction {
        let mut w = self.omega.clone();
        w.spline.coefficients_mut()[idx] += delta;
        w
    }

    pub fn evaluate(&self, omega: &WeightFunction) -> Evaluation {
        let phi = blended_field(Arc::new(omega.clone()), &self.left, &self.right);
        let grid = sample_field(&phi, Aabb::unit(), GRADIENT_RES).unwrap();
        let diagram = compute_persistence(&grid);
        let loss = loss(&diagram, &grid, &self.br);
        Evaluation { diagram, loss, grid }
    }

    pub fn gradient(&self, e: &Evaluation, fixed: &IndexSet) -> Vec<(usize, f64)> {
        loss_gradient(&e.diagram, &e.grid, &self.omega, &self.left, &self.right, &self.br, fixed)
            .into_iter()
            .collect()
    }
}

impl Evaluation {
    /// Selected pairs identified by their critical vertices.
    pub fn pairing(&self) -> Vec<(usize, usize, Option<usize>)> {
        self.loss
            .contributions
            .iter()
            .map(|c| {
                let p = &self.diagram.pairs[c.pair];
                (c.dim, p.birth_vertex, p.death_vertex)
            })
            .collect()
    }
}

/// Worst relative error between analytic and central-difference gradients
/// over `count` random configurations whose selected pairing survives the
/// probe step.
pub fn gradient_check(rng: &mut ChaCha8Rng, count: usize) -> f64 {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut trials = 0;
    while checked < count {
        trials += 1;
        assert!(trials < 50 * count, "too few stable configurations");
        let s = GradientSetup::random(rng);
        let e = s.evaluate(&s.omega);
        assert!(e.loss.total >= 0.0);
        if e.loss.total == 0.0 {
            continue;
        }
        let grad = s.gradient(&e, &IndexSet::empty(s.omega.spline.counts()));
        if grad.is_empty() {
            continue;
        }
        let (idx, g) = grad[rng.random_range(0..grad.len())];
        // The loss is affine in one coefficient while the pairing holds, so
        // small entries get a larger step to stay clear of rounding.
        let h = (1e-6 / g.abs()).clamp(1e-6, 1e-2);
        let plus = s.evaluate(&s.with_coefficient(idx, h));
        let minus = s.evaluate(&s.with_coefficient(idx, -h));
        if plus.pairing() != e.pairing() || minus.pairing() != e.pairing() {
            continue;
        }
        let fd = (plus.loss.total - minus.loss.total) / (2.0 * h);
        worst = worst.max((fd - g).abs() / g.abs());
        checked += 1;
    }
    worst
}
