use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{loss_with, LossBreakdown};
use crate::error::{Error, Result};
use crate::field::{Region, ScalarField};
use crate::geometry::{Aabb, Lattice};
use crate::init::WeightFunction;
use crate::spline::{IndexSet, LocalBasis};
use crate::topology::{compute_persistence_with, FilteredGrid, PersistenceOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeSettings {
    /// AdaGrad learning rate.
    pub eta: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    /// Lattice points per axis for persistence.
    pub resolution: [usize; 3],
}

impl Default for OptimizeSettings {
    fn default() -> Self {
        OptimizeSettings {
            eta: 0.05,
            epsilon: 1e-8,
            max_iters: 50,
            resolution: [50, 50, 50],
        }
    }
}

impl OptimizeSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) || !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::domain("learning rate and epsilon must be positive"));
        }
        if self.resolution.iter().any(|&r| r < 2) {
            return Err(Error::domain("optimization resolution needs at least 2 points per axis"));
        }
        Ok(())
    }
}

/// Everything one repair run needs. Only `omega`'s free coefficients move.
#[derive(Clone, Debug)]
pub struct RepairProblem {
    pub omega: WeightFunction,
    pub fixed: IndexSet,
    pub left: ScalarField,
    pub right: ScalarField,
    pub br: Region,
    /// Box the blended field is sampled over.
    pub bbox: Aabb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    /// Coefficient updates applied.
    pub iterations: usize,
    /// Loss before each update and after the last one.
    pub loss_trace: Vec<f64>,
    pub converged: bool,
    /// `(n0, n2)` of the last sampled field at the iso-level.
    pub betti: [usize; 2],
    pub wall_time: f64,
    pub resolution: [usize; 3],
}

impl OptimizeReport {
    pub fn initial_loss(&self) -> f64 {
        self.loss_trace.first().copied().unwrap_or(0.0)
    }

    pub fn final_loss(&self) -> f64 {
        self.loss_trace.last().copied().unwrap_or(0.0)
    }
}

/// Adaptive gradient descent `C ← C - η·g / √(G + ε)` on the free
/// coefficients, `G` accumulating `g²`. Stops when the loss is zero or after
/// `max_iters` updates; running out of iterations is reported, not an error.
///
/// With `trace` set, `loss.csv` and one diagram CSV per iteration are
/// written into that directory.
pub fn optimize(
    problem: &RepairProblem,
    settings: &OptimizeSettings,
    trace: Option<&Path>,
) -> Result<(WeightFunction, OptimizeReport)> {
    settings.validate()?;
    let start = Instant::now();
    let lattice = Lattice::new(problem.bbox, settings.resolution)?;
    let n = lattice.len();
    let sample = |f: &ScalarField| -> Vec<f64> { (0..n).into_par_iter().map(|i| f.eval(&lattice.point_at(i))).collect() };
    let left = sample(&problem.left);
    let right = sample(&problem.right);
    let in_br: Vec<bool> = (0..n).into_par_iter().map(|i| problem.br.contains(&lattice.point_at(i))).collect();
    let basis: Vec<LocalBasis> =
        (0..n).into_par_iter().map(|i| problem.omega.local_basis(&lattice.point_at(i))).collect();

    let mut trace_file = match trace {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join("loss.csv");
            let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            writeln!(f, "iteration,loss,n_ii_0,n_iii_0,n_ii_2,n_iii_2").map_err(|e| Error::io(&path, e))?;
            Some((dir, path, f))
        }
        None => None,
    };

    let mut omega = problem.omega.clone();
    let mut accumulated = vec![0.0; omega.spline.len()];
    let mut loss_trace = Vec::new();
    let mut iterations = 0;
    let (betti, converged) = loop {
        let spline = &omega.spline;
        let values: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let w = spline.eval_local(&basis[i]);
                (1.0 - w) * left[i] + w * right[i]
            })
            .collect();
        let grid = FilteredGrid::from_values(lattice, values)?;
        let diagram = compute_persistence_with(&grid, PersistenceOptions { dim1: false });
        let breakdown = loss_with(&diagram, |v| in_br[v]);
        loss_trace.push(breakdown.total);
        if let Some((dir, path, f)) = trace_file.as_mut() {
            write_trace_row(f, iterations, &breakdown).map_err(|e| Error::io(&*path, e))?;
            let dpath = dir.join(format!("diagram_{iterations:03}.csv"));
            let out = fs::File::create(&dpath).map_err(|e| Error::io(&dpath, e))?;
            diagram
                .write_csv(&grid, std::io::BufWriter::new(out))
                .map_err(|e| Error::io(&dpath, e))?;
        }
        let b = diagram.betti_at(0.0);
        if breakdown.total == 0.0 {
            break ([b[0], b[2]], true);
        }
        if iterations >= settings.max_iters {
            break ([b[0], b[2]], false);
        }

        let mut grad = vec![0.0; accumulated.len()];
        for c in &breakdown.contributions {
            let pair = &diagram.pairs[c.pair];
            let v = if c.sign > 0.0 {
                pair.death_vertex.expect("selected pairs are finite")
            } else {
                pair.birth_vertex
            };
            let jump = right[v] - left[v];
            spline.for_each_weight(&basis[v], |idx, w| grad[idx] += c.sign * w * jump);
        }
        let coeffs = omega.spline.coefficients_mut();
        for (idx, g) in grad.into_iter().enumerate() {
            if g == 0.0 || problem.fixed.contains_flat(idx) {
                continue;
            }
            accumulated[idx] += g * g;
            coeffs[idx] -= settings.eta * g / (accumulated[idx] + settings.epsilon).sqrt();
        }
        iterations += 1;
    };

    Ok((
        omega,
        OptimizeReport {
            iterations,
            loss_trace,
            converged,
            betti,
            wall_time: start.elapsed().as_secs_f64(),
            resolution: settings.resolution,
        },
    ))
}

fn write_trace_row(f: &mut fs::File, iteration: usize, b: &LossBreakdown) -> std::io::Result<()> {
    writeln!(f, "{iteration},{},{},{},{},{}", b.total, b.n_ii[0], b.n_iii[0], b.n_ii[2], b.n_iii[2])
}
