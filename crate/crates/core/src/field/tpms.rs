use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::Aabb;

/// Triply periodic minimal surface family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TpmsKind {
    /// Schwarz primitive.
    P,
    /// Schoen gyroid.
    G,
    /// Schwarz diamond.
    D,
    Iwp,
}

impl TpmsKind {
    pub fn eval(self, x: f64, y: f64, z: f64) -> f64 {
        match self {
            TpmsKind::P => x.cos() + y.cos() + z.cos(),
            TpmsKind::G => x.sin() * y.cos() + y.sin() * z.cos() + z.sin() * x.cos(),
            TpmsKind::D => x.cos() * y.cos() * z.cos() - x.sin() * y.sin() * z.sin(),
            TpmsKind::Iwp => {
                let (cx, cy, cz) = (x.cos(), y.cos(), z.cos());
                2.0 * (cx * cy + cy * cz + cz * cx) - ((2.0 * x).cos() + (2.0 * y).cos() + (2.0 * z).cos())
            }
        }
    }
}

/// Level-set approximant with `periods[a]` unit cells per unit length along axis `a`.
pub fn tpms(kind: TpmsKind, periods: [f64; 3]) -> Result<ScalarField> {
    if periods.iter().any(|&n| !(n > 0.0) || !n.is_finite()) {
        return Err(Error::domain(format!("periods {periods:?} must be positive")));
    }
    let scale = periods.map(|n| TAU * n);
    Ok(ScalarField::new(Aabb::unit(), move |p| {
        kind.eval(scale[0] * p[0], scale[1] * p[1], scale[2] * p[2])
    }))
}
