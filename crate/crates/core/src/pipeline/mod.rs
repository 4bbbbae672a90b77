//! Pairwise and sequential blending of porous structures.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{blended_field, clip_to_model, normalize_spec, PorousSpec, Region, ScalarField};
use crate::geometry::{Aabb, Point};
use crate::init::{initialize, InitPlan, WeightFunction};
use crate::optimize::{optimize, OptimizeSettings, RepairProblem};
use crate::topology::{compute_persistence, oracle_betti, sample_field};

/// Axis-aligned affine map of a box onto `[0,1]³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitScaling {
    pub bbox: Aabb,
}

impl UnitScaling {
    pub fn scale(&self) -> [f64; 3] {
        std::array::from_fn(|a| 1.0 / self.bbox.extent(a))
    }

    pub fn forward(&self, p: &Point) -> Point {
        std::array::from_fn(|a| (p[a] - self.bbox.min[a]) / self.bbox.extent(a))
    }

    pub fn inverse(&self, u: &Point) -> Point {
        std::array::from_fn(|a| self.bbox.min[a] + u[a] * self.bbox.extent(a))
    }
}

pub fn scale_to_unit(ter: &Aabb) -> Result<UnitScaling> {
    if ter.is_degenerate() || !ter.min.iter().chain(&ter.max).all(|c| c.is_finite()) {
        return Err(Error::domain(format!("cannot scale degenerate box {ter:?}")));
    }
    Ok(UnitScaling { bbox: *ter })
}

/// Blending region and initialization for one adjacent pair.
#[derive(Clone, Debug)]
pub struct StagePlan {
    pub br: Region,
    pub init: InitPlan,
}

/// Structures blended left to right. `regions[i]` is where `specs[i]` is
/// kept as is; `stages[i]` blends the running result with `specs[i + 1]`.
#[derive(Clone, Debug)]
pub struct BlendProblem {
    pub specs: Vec<PorousSpec>,
    pub regions: Vec<Region>,
    pub stages: Vec<StagePlan>,
    pub settings: OptimizeSettings,
    /// Clips every structure to `{model ≤ 0}` when present.
    pub model: Option<ScalarField>,
    /// Directory for per-stage loss and diagram traces.
    pub trace: Option<PathBuf>,
}

impl BlendProblem {
    pub fn validate(&self) -> Result<()> {
        if self.specs.len() < 2 {
            return Err(Error::domain("blending needs at least two structures"));
        }
        if self.regions.len() != self.specs.len() {
            return Err(Error::domain(format!(
                "{} structures but {} existing regions",
                self.specs.len(),
                self.regions.len()
            )));
        }
        if self.stages.len() + 1 != self.specs.len() {
            return Err(Error::domain(format!(
                "{} structures need {} blending regions, got {}",
                self.specs.len(),
                self.specs.len() - 1,
                self.stages.len()
            )));
        }
        self.settings.validate()?;
        for s in &self.stages {
            s.init.validate()?;
        }
        Ok(())
    }

    /// Bounding box of all existing regions.
    pub fn ter(&self) -> Aabb {
        let mut it = self.regions.iter().map(Region::bbox);
        let first = it.next().unwrap_or_else(Aabb::unit);
        it.fold(first, |a, b| a.union(&b))
    }

    /// Signed field of structure `i`, negative inside, clipped to the model.
    pub fn structure_field(&self, i: usize) -> ScalarField {
        let f = normalize_spec(&self.specs[i]);
        match &self.model {
            Some(m) => clip_to_model(&f, m),
            None => f,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub iterations: usize,
    pub loss_trace: Vec<f64>,
    pub converged: bool,
    /// `(n0, n2)` at the iso-level on the last optimization grid.
    pub betti: [usize; 2],
    pub inserted_knots: usize,
    /// Distance-fit residual before and after, for three-dimensional weights.
    pub fit_residual: Option<[f64; 2]>,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendReport {
    pub stages: Vec<StageReport>,
    pub resolution: [usize; 3],
    /// Betti numbers of the final field at the iso-level from persistence.
    pub betti: [usize; 3],
    /// `(β0, β2)` from direct flood fill.
    pub oracle_betti: [usize; 2],
    pub mismatch: bool,
    pub wall_time: f64,
}

impl BlendReport {
    pub fn converged(&self) -> bool {
        self.stages.iter().all(|s| s.converged)
    }

    pub fn iterations(&self) -> usize {
        self.stages.iter().map(|s| s.iterations).sum()
    }
}

/// Outcome of one stage, keeping the weight for inspection.
#[derive(Clone, Debug)]
pub struct StageResult {
    pub field: ScalarField,
    pub weight: Arc<WeightFunction>,
    pub report: StageReport,
}

fn blend_stage(
    left: &ScalarField,
    right: &ScalarField,
    (er1, er2): (&Region, &Region),
    stage: &StagePlan,
    ter: &Aabb,
    settings: &OptimizeSettings,
    trace: Option<PathBuf>,
) -> Result<StageResult> {
    let start = Instant::now();
    let init = initialize(er1, er2, &stage.br, ter, &stage.init)?;
    let problem = RepairProblem {
        omega: init.weight,
        fixed: init.fixed,
        left: left.clone(),
        right: right.clone(),
        br: stage.br.clone(),
        bbox: *ter,
    };
    let (weight, rep) = optimize(&problem, settings, trace.as_deref())?;
    let weight = Arc::new(weight);
    let field = blended_field(weight.clone(), left, right).with_bbox(*ter);
    Ok(StageResult {
        field,
        weight,
        report: StageReport {
            iterations: rep.iterations,
            loss_trace: rep.loss_trace,
            converged: rep.converged,
            betti: rep.betti,
            inserted_knots: init.inserted_knots,
            fit_residual: init.fit.map(|f| [f.initial_residual(), f.final_residual()]),
            wall_time: start.elapsed().as_secs_f64(),
        },
    })
}

/// Blend two signed fields across `br`. Both fields are negative inside
/// their structure.
pub fn blend_pair(
    left: &ScalarField,
    right: &ScalarField,
    er1: &Region,
    er2: &Region,
    br: &Region,
    plan: &InitPlan,
    settings: &OptimizeSettings,
) -> Result<(ScalarField, BlendReport)> {
    settings.validate()?;
    let start = Instant::now();
    let ter = er1.bbox().union(&er2.bbox());
    scale_to_unit(&ter)?;
    let stage = StagePlan {
        br: br.clone(),
        init: *plan,
    };
    let res = blend_stage(left, right, (er1, er2), &stage, &ter, settings, None)?;
    let report = final_report(&res.field, &ter, settings.resolution, vec![res.report], start)?;
    Ok((res.field, report))
}

/// Fold the structures left to right: stage `i` blends the running field,
/// which covers the union of regions `0..=i`, with structure `i + 1`.
pub fn blend_many(problem: &BlendProblem) -> Result<(ScalarField, BlendReport)> {
    problem.validate()?;
    let start = Instant::now();
    let ter = problem.ter();
    scale_to_unit(&ter)?;
    let mut phi = problem.structure_field(0).with_bbox(ter);
    let mut cer = problem.regions[0].clone();
    let mut reports = Vec::with_capacity(problem.stages.len());
    for (i, stage) in problem.stages.iter().enumerate() {
        let right = problem.structure_field(i + 1);
        let er2 = &problem.regions[i + 1];
        let trace = problem.trace.as_ref().map(|d| d.join(format!("stage_{i}")));
        let res = blend_stage(&phi, &right, (&cer, er2), stage, &ter, &problem.settings, trace).map_err(|e| {
            Error::Stage {
                stage: i,
                source: Box::new(e),
            }
        })?;
        phi = res.field;
        cer = cer.union(er2);
        reports.push(res.report);
    }
    let report = final_report(&phi, &ter, problem.settings.resolution, reports, start)?;
    Ok((phi, report))
}

fn final_report(
    phi: &ScalarField,
    ter: &Aabb,
    resolution: [usize; 3],
    stages: Vec<StageReport>,
    start: Instant,
) -> Result<BlendReport> {
    let grid = sample_field(phi, *ter, resolution)?;
    let betti = compute_persistence(&grid).betti_at(0.0);
    let oracle = oracle_betti(&grid, 0.0);
    Ok(BlendReport {
        stages,
        resolution,
        betti,
        oracle_betti: oracle,
        mismatch: betti[0] != oracle[0] || betti[2] != oracle[1],
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Largest `|φ - φ_j|` over up to `probes` random points lying in some
/// existing region `j` and outside every blending region.
pub fn outside_br_deviation(problem: &BlendProblem, phi: &ScalarField, probes: usize, seed: u64) -> f64 {
    let ter = problem.ter();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields: Vec<ScalarField> = (0..problem.specs.len()).map(|i| problem.structure_field(i)).collect();
    let mut worst: f64 = 0.0;
    let mut found = 0;
    for _ in 0..probes * 1000 {
        if found == probes {
            break;
        }
        let p: Point = std::array::from_fn(|a| rng.random_range(ter.min[a]..=ter.max[a]));
        if problem.stages.iter().any(|s| s.br.contains(&p)) {
            continue;
        }
        let Some(j) = problem.regions.iter().position(|r| r.contains(&p)) else {
            continue;
        };
        found += 1;
        worst = worst.max((phi.eval(&p) - fields[j].eval(&p)).abs());
    }
    worst
}
