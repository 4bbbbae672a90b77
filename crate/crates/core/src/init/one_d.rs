use super::support::{cube_lattice, mark, Classified, IN_BR, IN_ER1, IN_ER2};
use super::{CoordinateFrame, InitPlan, Initialization, ParamMap, WeightFunction};
use crate::error::{Error, Result};
use crate::field::Region;
use crate::geometry::Aabb;
use crate::spline::{KnotVector, SplineVolume};

/// Univariate ramp along the frame coordinate.
///
/// Coefficients touching `er1 ∖ br` are 0, those touching `er2 ∖ br` are 1,
/// and the ones in between rise linearly in index order, taking the
/// normalized coordinate `(u - u₁) / (u₂ - u₁)` at their Greville abscissa.
pub fn init_1d(
    frame: CoordinateFrame,
    er1: &Region,
    er2: &Region,
    br: &Region,
    ter: &Aabb,
    plan: &InitPlan,
) -> Result<Initialization> {
    let map = ParamMap::frame(frame, ter)?;
    let count = plan.counts[0];
    let kv = KnotVector::clamped_uniform(plan.degrees[0], count, 0.0, 1.0)?;
    let spline = SplineVolume::univariate(kv, vec![0.0; count])?;

    let samples = Classified::new(er1, er2, br, cube_lattice(ter, plan.grid)?);
    let pad = map.param_spacing(&samples.lattice);

    let outside1 = |f: u8| f & IN_ER1 != 0 && f & IN_BR == 0;
    let outside2 = |f: u8| f & IN_ER2 != 0 && f & IN_BR == 0;
    let t_max1 = samples.select(outside1).map(|p| frame.coordinate(p)).fold(f64::NEG_INFINITY, f64::max);
    let t_min2 = samples.select(outside2).map(|p| frame.coordinate(p)).fold(f64::INFINITY, f64::min);
    if !(t_max1 < t_min2) {
        return Err(Error::domain(format!(
            "first region reaches coordinate {t_max1} but second starts at {t_min2}; they must be ordered and separated"
        )));
    }

    let zeros = mark(&spline, &map, pad, samples.select(outside1));
    let ones = mark(&spline, &map, pad, samples.select(outside2));
    let last_zero = zeros.iter().last();
    let first_one = ones.iter().next();
    if let (Some(z), Some(o)) = (last_zero, first_one) {
        if z >= o {
            return Err(Error::domain(format!(
                "blending region is narrower than one basis support ({count} coefficients)"
            )));
        }
    }
    // Greville abscissae are affine in the index for uniform knots, so the
    // ramp reproduces the normalized coordinate between the two regions.
    let u_lo = samples.select(outside1).map(|p| map.param(p)[0]).fold(f64::NEG_INFINITY, f64::max);
    let u_hi = samples.select(outside2).map(|p| map.param(p)[0]).fold(f64::INFINITY, f64::min);
    let kv = spline.knots(0);
    let coeffs: Vec<f64> = (0..count)
        .map(|i| {
            if zeros.contains_flat(i) {
                0.0
            } else if ones.contains_flat(i) {
                1.0
            } else {
                ((greville(kv, i) - u_lo) / (u_hi - u_lo)).clamp(0.0, 1.0)
            }
        })
        .collect();
    let spline = SplineVolume::univariate(spline.knots(0).clone(), coeffs)?;

    let fixed = mark(&spline, &map, pad, samples.select(|f| f & IN_BR == 0));
    Ok(Initialization {
        weight: WeightFunction::new(spline, map),
        fixed,
        inserted_knots: 0,
        fit: None,
    })
}

fn greville(kv: &KnotVector, i: usize) -> f64 {
    let k = kv.knots();
    let p = kv.degree();
    if p == 0 {
        0.5 * (k[i] + k[i + 1])
    } else {
        k[i + 1..=i + p].iter().sum::<f64>() / p as f64
    }
}
