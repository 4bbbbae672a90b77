use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topoblend::field::Region;
use topoblend::init::{generate_fit_data, init_1d, init_3d, CoordinateFrame, InitPlan, Initialization};
use topoblend::{Aabb, Axis, Lattice, Point};

fn slab(lo: f64, hi: f64) -> Region {
    Region::aabb(Aabb::new([lo, 0.0, 0.0], [hi, 1.0, 1.0]))
}

fn probes(seed: u64, n: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| std::array::from_fn(|_| rng.random_range(0.0..=1.0))).collect()
}

/// ω = 0 on `er1 ∖ br` and 1 on `er2 ∖ br`.
fn check_boundary_values(init: &Initialization, er1: &Region, er2: &Region, br: &Region, pts: &[Point]) {
    let (mut n1, mut n2) = (0, 0);
    for p in pts {
        if br.contains(p) {
            continue;
        }
        let w = init.weight.eval(p);
        if er1.contains(p) {
            n1 += 1;
            assert!(w.abs() <= 1e-6, "ω = {w} at {p:?} in ER1");
        } else if er2.contains(p) {
            n2 += 1;
            assert!((w - 1.0).abs() <= 1e-6, "ω = {w} at {p:?} in ER2");
        }
    }
    assert!(n1 > 0 && n2 > 0);
}

fn planar() -> (Region, Region, Region) {
    (slab(0.0, 0.5), slab(0.5, 1.0), slab(0.3, 0.7))
}

#[test]
fn one_dimensional_ramp_is_monotone_and_pinned() {
    let (er1, er2, br) = planar();
    let plan = InitPlan::one_dimensional(CoordinateFrame::Cartesian { axis: Axis::X });
    let init = init_1d(CoordinateFrame::Cartesian { axis: Axis::X }, &er1, &er2, &br, &Aabb::unit(), &plan).unwrap();
    let c = init.weight.spline.coefficients();
    assert_eq!(c.len(), 50);
    assert!(c.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(init.weight.eval(&[0.1, 0.5, 0.5]), 0.0);
    assert_eq!(init.weight.eval(&[0.9, 0.5, 0.5]), 1.0);
    let line: Vec<f64> = (0..=1000).map(|i| init.weight.eval(&[i as f64 / 1000.0, 0.3, 0.7])).collect();
    assert!(line.windows(2).all(|w| w[0] <= w[1] + 1e-15));
    check_boundary_values(&init, &er1, &er2, &br, &probes(1, 2000));
}

#[test]
fn cylindrical_ramp_is_constant_on_cylinders() {
    let center = [0.5, 0.5, 0.0];
    let frame = CoordinateFrame::Cylindrical { axis: Axis::Z, center };
    let er1 = Region::cylinder(Axis::Z, center, 0.25, (0.0, 1.0));
    let er2 = Region::aabb(Aabb::unit()).difference(&er1);
    let br = Region::cylinder(Axis::Z, center, 0.3, (0.0, 1.0)).difference(&Region::cylinder(
        Axis::Z,
        center,
        0.2,
        (0.0, 1.0),
    ));
    let plan = InitPlan::one_dimensional(frame);
    let init = init_1d(frame, &er1, &er2, &br, &Aabb::unit(), &plan).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let r = rng.random_range(0.0..0.5);
        let base = init.weight.eval(&[0.5 + r, 0.5, 0.2]);
        for _ in 0..5 {
            let t = rng.random_range(0.0..TAU);
            let p = [0.5 + r * t.cos(), 0.5 + r * t.sin(), rng.random_range(0.0..1.0)];
            assert!((init.weight.eval(&p) - base).abs() < 1e-12);
        }
    }
}

#[test]
fn fit_data_is_a_distance_ramp() {
    let (er1, er2, br) = planar();
    let lattice = Lattice::new(Aabb::unit(), [41, 9, 9]).unwrap();
    let data = generate_fit_data(&er1, &er2, &br, &lattice).unwrap();
    assert!(!data.zero_boundary.is_empty() && !data.one_boundary.is_empty());
    let h = 1.0 / 40.0;
    for (p, v) in &data.points {
        assert!((0.0..=1.0).contains(v));
        let depth = (p[0] - 0.3) / 0.4;
        assert!((v - depth).abs() <= 2.0 * h / 0.4, "{v} at depth {depth}");
        if p[0] < 0.3 {
            assert_eq!(*v, 0.0);
        }
        if p[0] > 0.7 {
            assert_eq!(*v, 1.0);
        }
    }
    for p in &data.zero_boundary {
        assert!(data.points.iter().any(|(q, v)| q == p && *v == 0.0));
    }
}

fn small_3d(counts: [usize; 3], grid: usize) -> InitPlan {
    let mut plan = InitPlan::three_dimensional();
    plan.counts = counts;
    plan.grid = grid;
    plan
}

#[test]
fn three_dimensional_agrees_with_ramp_on_planar_interface() {
    let (er1, er2, br) = planar();
    let ter = Aabb::unit();
    let frame = CoordinateFrame::Cartesian { axis: Axis::X };
    let one = init_1d(frame, &er1, &er2, &br, &ter, &InitPlan::one_dimensional(frame)).unwrap();
    let three = init_3d(&er1, &er2, &br, &ter, &small_3d([50, 4, 4], 64)).unwrap();
    for idx in three.fixed.iter() {
        let c = three.weight.spline.coefficients()[idx];
        assert!(c == 0.0 || c == 1.0, "fixed coefficient {c}");
    }
    let pts = probes(3, 1000);
    let worst = pts
        .iter()
        .map(|p| (one.weight.eval(p) - three.weight.eval(p)).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.05, "max difference {worst}");
    check_boundary_values(&three, &er1, &er2, &br, &pts);
}

#[test]
fn half_level_tracks_a_sinusoidal_interface() {
    let ter = Aabb::new([0.0; 3], [1.0, 1.0, 0.25]);
    let s = |x: f64| 0.5 + 0.15 * (TAU * x).sin();
    let boxed = move |f: fn(&Point) -> f64| {
        let b = Region::aabb(ter);
        Region::from_fn(ter, move |p| f(p).max(b.indicator().eval(p)))
    };
    let er1 = boxed(|p| p[1] - (0.5 + 0.15 * (TAU * p[0]).sin()));
    let er2 = boxed(|p| (0.5 + 0.15 * (TAU * p[0]).sin()) - p[1]);
    let br = boxed(|p| (p[1] - (0.5 + 0.15 * (TAU * p[0]).sin())).abs() - 0.2);
    let grid = 48;
    let init = init_3d(&er1, &er2, &br, &ter, &small_3d([40, 40, 6], grid)).unwrap();
    check_boundary_values(&init, &er1, &er2, &br, &probes(4, 2000).iter().map(|p| [p[0], p[1], 0.25 * p[2]]).collect::<Vec<_>>());
    let cell = 1.0 / (grid - 1) as f64;
    for i in 1..20 {
        let x = i as f64 / 20.0;
        // Bisection for ω = 1/2 on the vertical line, bracketed by the band.
        let (mut lo, mut hi) = (s(x) - 0.2, s(x) + 0.2);
        let w = |y: f64| init.weight.eval(&[x, y, 0.125]) - 0.5;
        assert!(w(lo) < 0.0 && w(hi) > 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if w(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - s(x)).abs() <= cell, "x = {x}: level at {lo}, interface at {}", s(x));
    }
}

#[test]
fn four_component_band_stays_near_unit_interval() {
    let centers = [[0.3, 0.3, 0.0], [0.7, 0.3, 0.0], [0.3, 0.7, 0.0], [0.7, 0.7, 0.0]];
    let disks = |r: f64| {
        centers[1..]
            .iter()
            .fold(Region::cylinder(Axis::Z, centers[0], r, (0.0, 1.0)), |acc, c| {
                acc.union(&Region::cylinder(Axis::Z, *c, r, (0.0, 1.0)))
            })
    };
    let unit = Region::aabb(Aabb::unit());
    let er2 = disks(0.1);
    let er1 = unit.difference(&er2);
    let br = disks(0.17).difference(&disks(0.03));
    let init = init_3d(&er1, &er2, &br, &Aabb::unit(), &small_3d([48, 48, 4], 64)).unwrap();
    let fit = init.fit.as_ref().unwrap();
    assert!(fit.final_residual() <= fit.initial_residual());
    let lattice = Lattice::new(Aabb::unit(), [60, 60, 5]).unwrap();
    for p in lattice.points() {
        let w = init.weight.eval(&p);
        assert!((-0.05..=1.05).contains(&w), "ω = {w} at {p:?}");
    }
    check_boundary_values(&init, &er1, &er2, &br, &probes(5, 3000));
}
