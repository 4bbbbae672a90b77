use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{IndexSet, SplineVolume};
use crate::error::{Error, Result};

/// Stopping rule for [`local_lspia_fit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    pub max_iters: usize,
    /// Stop once one sweep lowers the residual sum of squares by less than this.
    pub tol: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            max_iters: 500,
            tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    /// Residual sum of squares before the first sweep and after each sweep.
    pub residuals: Vec<f64>,
    /// Data points whose every supporting coefficient is fixed.
    pub fixed_only_points: usize,
}

impl FitDiagnostics {
    pub fn initial_residual(&self) -> f64 {
        self.residuals.first().copied().unwrap_or(0.0)
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

struct Sample {
    start: usize,
    end: usize,
    value: f64,
}

/// Least-squares fit of the free coefficients of `s0` to `(parameter, value)`
/// data by local progressive-iterative approximation.
///
/// Each sweep moves coefficient `c` by `Σ_p R_c(p) r_p / Σ_p R_c(p)`, the
/// residual-weighted average over the points it supports. Coefficients in
/// `fixed` are never written.
pub fn local_lspia_fit(
    data: &[([f64; 3], f64)],
    s0: &SplineVolume,
    fixed: &IndexSet,
    settings: FitSettings,
) -> Result<(SplineVolume, FitDiagnostics)> {
    if fixed.len_total() != s0.len() {
        return Err(Error::domain(format!(
            "fixed set covers {} coefficients, spline has {}",
            fixed.len_total(),
            s0.len()
        )));
    }
    let mut diag = FitDiagnostics::default();
    if data.is_empty() {
        return Ok((s0.clone(), diag));
    }

    let mut entries: Vec<(usize, f64)> = Vec::new();
    let mut samples = Vec::with_capacity(data.len());
    for (uvw, value) in data {
        let lb = s0.local_basis(*uvw)?;
        let start = entries.len();
        s0.for_each_weight(&lb, |idx, w| {
            if w != 0.0 {
                entries.push((idx, w));
            }
        });
        let end = entries.len();
        if entries[start..end].iter().all(|&(idx, _)| fixed.contains_flat(idx)) {
            diag.fixed_only_points += 1;
        }
        samples.push(Sample { start, end, value: *value });
    }

    // Per-coefficient view of the same weights: (sample, weight) runs.
    let mut offsets = vec![0usize; s0.len() + 1];
    for &(idx, _) in &entries {
        offsets[idx + 1] += 1;
    }
    for i in 0..s0.len() {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut by_coeff = vec![(0usize, 0.0); entries.len()];
    for (k, sample) in samples.iter().enumerate() {
        for &(idx, w) in &entries[sample.start..sample.end] {
            by_coeff[cursor[idx]] = (k, w);
            cursor[idx] += 1;
        }
    }
    let influence: Vec<f64> = (0..s0.len())
        .map(|c| by_coeff[offsets[c]..offsets[c + 1]].iter().map(|e| e.1).sum())
        .collect();

    let mut spline = s0.clone();
    let mut residual = vec![0.0; samples.len()];
    let mut ssr = residuals(&spline, &samples, &entries, &mut residual);
    diag.residuals.push(ssr);

    for _ in 0..settings.max_iters {
        let delta: Vec<f64> = (0..s0.len())
            .into_par_iter()
            .map(|c| {
                if fixed.contains_flat(c) || influence[c] <= 0.0 {
                    return 0.0;
                }
                let num: f64 = by_coeff[offsets[c]..offsets[c + 1]].iter().map(|&(k, w)| w * residual[k]).sum();
                num / influence[c]
            })
            .collect();
        let before = spline.coefficients().to_vec();
        for (c, d) in spline.coefficients_mut().iter_mut().zip(&delta) {
            *c += d;
        }
        let next = residuals(&spline, &samples, &entries, &mut residual);
        diag.iterations += 1;
        if next > ssr {
            // Rounding can make a converged sweep drift upward; keep the better state.
            spline.coefficients_mut().copy_from_slice(&before);
            residuals(&spline, &samples, &entries, &mut residual);
            diag.residuals.push(ssr);
            break;
        }
        diag.residuals.push(next);
        let improvement = ssr - next;
        ssr = next;
        if improvement < settings.tol {
            break;
        }
    }
    Ok((spline, diag))
}

fn residuals(spline: &SplineVolume, samples: &[Sample], entries: &[(usize, f64)], out: &mut [f64]) -> f64 {
    let c = spline.coefficients();
    out.par_iter_mut().zip(samples.par_iter()).for_each(|(r, sample)| {
        let fit: f64 = entries[sample.start..sample.end].iter().map(|&(idx, w)| w * c[idx]).sum();
        *r = sample.value - fit;
    });
    out.iter().map(|r| r * r).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::KnotVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cube(count: usize) -> SplineVolume {
        let knots = std::array::from_fn(|_| KnotVector::clamped_uniform(2, count, 0.0, 1.0).unwrap());
        SplineVolume::constant(knots, 0.0)
    }

    #[test]
    fn all_fixed_returns_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut s0 = cube(5);
        for c in s0.coefficients_mut() {
            *c = rng.random();
        }
        let data: Vec<_> = (0..200)
            .map(|_| {
                let p = [rng.random(), rng.random(), rng.random()];
                (p, s0.eval(p).unwrap())
            })
            .collect();
        let fixed = IndexSet::full(s0.counts());
        let (fit, diag) = local_lspia_fit(&data, &s0, &fixed, FitSettings::default()).unwrap();
        assert_eq!(fit, s0);
        assert_eq!(diag.fixed_only_points, 200);
        assert!(diag.final_residual() < 1e-20);
    }

    #[test]
    fn residual_is_monotone_on_representable_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s0 = cube(6);
        let data: Vec<_> = (0..600)
            .map(|_| {
                let p: [f64; 3] = [rng.random(), rng.random(), rng.random()];
                (p, p[0] * p[0] + 0.5 * p[1] - p[2] * p[0])
            })
            .collect();
        let (_, diag) = local_lspia_fit(&data, &s0, &IndexSet::empty(s0.counts()), FitSettings::default()).unwrap();
        assert!(diag.residuals.windows(2).all(|w| w[1] <= w[0]));
        assert!(diag.final_residual() < 1e-3 * diag.initial_residual());
    }

    #[test]
    fn empty_data_is_identity() {
        let s0 = cube(4);
        let (fit, diag) = local_lspia_fit(&[], &s0, &IndexSet::empty(s0.counts()), FitSettings::default()).unwrap();
        assert_eq!(fit, s0);
        assert_eq!(diag.iterations, 0);
    }
}
