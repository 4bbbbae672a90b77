use rayon::prelude::*;

use super::support::{cube_lattice, mark, Classified, IN_BR, IN_ER1, IN_ER2};
use super::{InitPlan, Initialization, ParamMap, WeightFunction};
use crate::error::{Error, Result};
use crate::field::Region;
use crate::geometry::{Aabb, Lattice, Point};
use crate::spatial::KdTree;
use crate::spline::{local_lspia_fit, KnotVector, SplineVolume};

/// Cell-center samples for the distance fit.
#[derive(Clone, Debug, Default)]
pub struct FitData {
    /// `(point, value)` for boundary cells (0 or 1) and interior cells.
    pub points: Vec<(Point, f64)>,
    pub zero_boundary: Vec<Point>,
    pub one_boundary: Vec<Point>,
    pub interior: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum CellClass {
    Skip,
    Zero,
    One,
    /// Touches the blending boundary and both regions.
    Junction,
    Interior,
}

/// Classify the cells of `lattice` against the regions and build the fit
/// samples: 0 on cells touching `∂br` and `er1`, 1 on cells touching `∂br`
/// and `er2`, and `d₀ / (d₀ + d₁)` on cells strictly inside `br`, where `dᵢ`
/// is the distance to the nearest boundary cell of each kind.
pub fn generate_fit_data(er1: &Region, er2: &Region, br: &Region, lattice: &Lattice) -> Result<FitData> {
    generate_fit_data_on(&Classified::new(er1, er2, br, *lattice), er1, er2, br)
}

fn generate_fit_data_on(corners: &Classified, er1: &Region, er2: &Region, br: &Region) -> Result<FitData> {
    let data = fit_data_from(corners, er1, er2, br);
    if data.zero_boundary.is_empty() || data.one_boundary.is_empty() {
        return Err(Error::domain("blending region boundary does not meet both existing regions"));
    }
    Ok(data)
}

fn fit_data_from(corners: &Classified, er1: &Region, er2: &Region, br: &Region) -> FitData {
    let lat = &corners.lattice;
    let cell_dims = lat.dims.map(|d| d.saturating_sub(1).max(1));
    let n_cells: usize = cell_dims.iter().product();
    let cells: Vec<(Point, CellClass)> = (0..n_cells)
        .into_par_iter()
        .map(|c| {
            let ci = [c % cell_dims[0], (c / cell_dims[0]) % cell_dims[1], c / (cell_dims[0] * cell_dims[1])];
            let mut flags = Vec::with_capacity(9);
            let mut lo = [0.0; 3];
            let mut hi = [0.0; 3];
            for corner in 0..8 {
                let ijk: [usize; 3] =
                    std::array::from_fn(|a| (ci[a] + ((corner >> a) & 1)).min(lat.dims[a] - 1));
                flags.push(corners.flags[lat.linear(ijk)]);
                if corner == 0 {
                    lo = lat.point(ijk);
                }
                if corner == 7 {
                    hi = lat.point(ijk);
                }
            }
            let center: Point = std::array::from_fn(|a| 0.5 * (lo[a] + hi[a]));
            let mut f = 0;
            if er1.contains(&center) {
                f |= IN_ER1;
            }
            if er2.contains(&center) {
                f |= IN_ER2;
            }
            if br.contains(&center) {
                f |= IN_BR;
            }
            flags.push(f);
            let in_br = flags.iter().filter(|&&f| f & IN_BR != 0).count();
            let touches_1 = flags.iter().any(|&f| f & IN_ER1 != 0);
            let touches_2 = flags.iter().any(|&f| f & IN_ER2 != 0);
            let class = if in_br == 9 {
                CellClass::Interior
            } else if in_br == 0 {
                CellClass::Skip
            } else {
                match (touches_1, touches_2) {
                    (true, false) => CellClass::Zero,
                    (false, true) => CellClass::One,
                    (true, true) => CellClass::Junction,
                    (false, false) => CellClass::Skip,
                }
            };
            (center, class)
        })
        .collect();

    let mut data = FitData::default();
    for (p, class) in &cells {
        match class {
            CellClass::Zero => data.zero_boundary.push(*p),
            CellClass::One => data.one_boundary.push(*p),
            CellClass::Junction => {
                data.zero_boundary.push(*p);
                data.one_boundary.push(*p);
            }
            _ => {}
        }
    }
    if data.zero_boundary.is_empty() || data.one_boundary.is_empty() {
        return data;
    }
    let t0 = KdTree::build(data.zero_boundary.clone());
    let t1 = KdTree::build(data.one_boundary.clone());
    let interior: Vec<Point> = cells.iter().filter(|c| c.1 == CellClass::Interior).map(|c| c.0).collect();
    let values: Vec<f64> = interior
        .par_iter()
        .map(|p| {
            let d0 = t0.nearest_distance(p);
            let d1 = t1.nearest_distance(p);
            if d0 + d1 > 0.0 {
                d0 / (d0 + d1)
            } else {
                0.5
            }
        })
        .collect();
    for (p, class) in &cells {
        match class {
            CellClass::Zero => data.points.push((*p, 0.0)),
            CellClass::One => data.points.push((*p, 1.0)),
            _ => {}
        }
    }
    data.interior = interior.len();
    data.points.extend(interior.into_iter().zip(values));
    data
}

/// Three-dimensional weight: support-based coefficients, then a constrained
/// fit to distance-ramp data inside `br`.
pub fn init_3d(er1: &Region, er2: &Region, br: &Region, ter: &Aabb, plan: &InitPlan) -> Result<Initialization> {
    let map = ParamMap::unit(*ter)?;
    let knots: [KnotVector; 3] = [
        KnotVector::clamped_uniform(plan.degrees[0], plan.counts[0], 0.0, 1.0)?,
        KnotVector::clamped_uniform(plan.degrees[1], plan.counts[1], 0.0, 1.0)?,
        KnotVector::clamped_uniform(plan.degrees[2], plan.counts[2], 0.0, 1.0)?,
    ];
    let mut spline = SplineVolume::constant(knots, 0.0);
    let samples = Classified::new(er1, er2, br, cube_lattice(ter, plan.grid)?);
    let pad = map.param_spacing(&samples.lattice);
    let outside1 = |f: u8| f & IN_ER1 != 0 && f & IN_BR == 0;
    let outside2 = |f: u8| f & IN_ER2 != 0 && f & IN_BR == 0;

    let mut inserted = 0;
    let mut rounds = 0;
    let (zeros, ones) = loop {
        let zeros = mark(&spline, &map, pad, samples.select(outside1));
        let ones = mark(&spline, &map, pad, samples.select(outside2));
        let conflict: Vec<usize> = zeros.iter().filter(|&i| ones.contains_flat(i)).collect();
        if conflict.is_empty() {
            break (zeros, ones);
        }
        if rounds >= plan.max_refinements {
            return Err(Error::domain(format!(
                "{} coefficients still touch both existing regions after refinement; widen the blending region",
                conflict.len()
            )));
        }
        let (refined, count) = refine(&spline, &conflict)?;
        spline = refined;
        inserted += count;
        rounds += 1;
    };

    let touch1 = mark(&spline, &map, pad, samples.select(|f| f & IN_ER1 != 0));
    let touch2 = mark(&spline, &map, pad, samples.select(|f| f & IN_ER2 != 0));
    for (idx, c) in spline.coefficients_mut().iter_mut().enumerate() {
        *c = if zeros.contains_flat(idx) {
            0.0
        } else if ones.contains_flat(idx) {
            1.0
        } else {
            match (touch1.contains_flat(idx), touch2.contains_flat(idx)) {
                (true, false) => 0.0,
                (false, true) => 1.0,
                _ => 0.5,
            }
        };
    }
    let fixed = mark(&spline, &map, pad, samples.select(|f| f & IN_BR == 0));

    let data = generate_fit_data_on(&samples, er1, er2, br)?;
    let params: Vec<([f64; 3], f64)> = data.points.iter().map(|(p, v)| (map.param(p), *v)).collect();
    let (spline, diag) = local_lspia_fit(&params, &spline, &fixed, plan.fit)?;
    Ok(Initialization {
        weight: WeightFunction::new(spline, map),
        fixed,
        inserted_knots: inserted,
        fit: Some(diag),
    })
}

/// Insert the midpoint of every nonempty knot span under the conflicting
/// supports, on every axis that carries more than one basis.
fn refine(spline: &SplineVolume, conflict: &[usize]) -> Result<(SplineVolume, usize)> {
    let mut out = spline.clone();
    let mut count = 0;
    for axis in 0..3 {
        let kv = spline.knots(axis);
        if kv.basis_count() == 1 {
            continue;
        }
        let k = kv.knots();
        let p = kv.degree();
        let mut mids: Vec<f64> = Vec::new();
        for &flat in conflict {
            let i = spline.multi_index(flat)[axis];
            for s in i..=i + p {
                if k[s + 1] > k[s] {
                    mids.push(0.5 * (k[s] + k[s + 1]));
                }
            }
        }
        mids.sort_by(f64::total_cmp);
        mids.dedup();
        for u in mids {
            out = out.insert_knot(axis, u)?;
            count += 1;
        }
    }
    Ok((out, count))
}
