//! Initial blending weights: one-dimensional ramps and the three-dimensional
//! distance fit.

mod one_d;
mod support;
mod three_d;
mod weight;

use serde::{Deserialize, Serialize};

pub use one_d::init_1d;
pub use support::fixed_index_set;
pub use three_d::{generate_fit_data, init_3d, FitData};
pub use weight::{CoordinateFrame, ParamMap, WeightFunction};

use crate::error::{Error, Result};
use crate::spline::{FitDiagnostics, FitSettings, IndexSet, MAX_DEGREE};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InitMode {
    OneDimensional { frame: CoordinateFrame },
    ThreeDimensional,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitPlan {
    pub mode: InitMode,
    /// Degrees per parameter axis; only the first entry is used in one dimension.
    pub degrees: [usize; 3],
    pub counts: [usize; 3],
    /// Lattice points per axis used to classify supports and generate fit data.
    pub grid: usize,
    pub fit: FitSettings,
    /// Rounds of knot refinement allowed when a support touches both regions.
    pub max_refinements: usize,
}

impl InitPlan {
    pub fn one_dimensional(frame: CoordinateFrame) -> Self {
        InitPlan {
            mode: InitMode::OneDimensional { frame },
            degrees: [3, 0, 0],
            counts: [50, 1, 1],
            grid: 64,
            fit: FitSettings::default(),
            max_refinements: 3,
        }
    }

    pub fn three_dimensional() -> Self {
        InitPlan {
            mode: InitMode::ThreeDimensional,
            degrees: [3, 3, 3],
            counts: [80, 80, 20],
            grid: 64,
            fit: FitSettings::default(),
            max_refinements: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let axes = match self.mode {
            InitMode::OneDimensional { frame } => {
                frame.validate()?;
                1
            }
            InitMode::ThreeDimensional => 3,
        };
        for a in 0..axes {
            if self.degrees[a] > MAX_DEGREE {
                return Err(Error::domain(format!("degree {} exceeds {MAX_DEGREE}", self.degrees[a])));
            }
            if self.counts[a] < self.degrees[a] + 1 {
                return Err(Error::domain(format!(
                    "{} coefficients cannot carry degree {}",
                    self.counts[a], self.degrees[a]
                )));
            }
        }
        if self.grid < 2 {
            return Err(Error::domain("initialization grid needs at least 2 points per axis"));
        }
        Ok(())
    }
}

/// An initial weight together with the coefficients the optimizer must not move.
#[derive(Clone, Debug)]
pub struct Initialization {
    pub weight: WeightFunction,
    pub fixed: IndexSet,
    /// Knots inserted to separate the two existing regions (3-d only).
    pub inserted_knots: usize,
    pub fit: Option<FitDiagnostics>,
}

/// Dispatch on the plan's mode.
pub fn initialize(
    er1: &crate::field::Region,
    er2: &crate::field::Region,
    br: &crate::field::Region,
    ter: &crate::geometry::Aabb,
    plan: &InitPlan,
) -> Result<Initialization> {
    plan.validate()?;
    match plan.mode {
        InitMode::OneDimensional { frame } => init_1d(frame, er1, er2, br, ter, plan),
        InitMode::ThreeDimensional => init_3d(er1, er2, br, ter, plan),
    }
}
