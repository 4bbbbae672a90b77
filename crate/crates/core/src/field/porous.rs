use serde::{Deserialize, Serialize};

use super::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::Lattice;

/// Set convention for extracting a solid from a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PorousKind {
    /// `{φ ≥ c}`
    Pore,
    /// `{φ ≤ c}`
    Rod,
    /// `{c₁ ≤ φ ≤ c₂}`
    Sheet,
}

#[derive(Clone, Debug)]
pub enum Thresholds {
    Single(ScalarField),
    Pair(ScalarField, ScalarField),
}

#[derive(Clone, Debug)]
pub struct PorousSpec {
    kind: PorousKind,
    base: ScalarField,
    thresholds: Thresholds,
}

impl PorousSpec {
    pub fn pore(base: ScalarField, c: ScalarField) -> Self {
        PorousSpec {
            kind: PorousKind::Pore,
            base,
            thresholds: Thresholds::Single(c),
        }
    }

    pub fn rod(base: ScalarField, c: ScalarField) -> Self {
        PorousSpec {
            kind: PorousKind::Rod,
            base,
            thresholds: Thresholds::Single(c),
        }
    }

    pub fn sheet(base: ScalarField, c1: ScalarField, c2: ScalarField) -> Self {
        PorousSpec {
            kind: PorousKind::Sheet,
            base,
            thresholds: Thresholds::Pair(c1, c2),
        }
    }

    /// Constant-threshold constructor; `c2` is only read for sheets.
    pub fn with_constants(kind: PorousKind, base: ScalarField, c1: f64, c2: f64) -> Self {
        let bbox = base.bbox();
        let c = |v| ScalarField::constant(v, bbox);
        match kind {
            PorousKind::Pore => PorousSpec::pore(base, c(c1)),
            PorousKind::Rod => PorousSpec::rod(base, c(c1)),
            PorousKind::Sheet => PorousSpec::sheet(base, c(c1), c(c2)),
        }
    }

    pub fn kind(&self) -> PorousKind {
        self.kind
    }

    pub fn base(&self) -> &ScalarField {
        &self.base
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    /// Membership by the raw set definition.
    pub fn contains(&self, p: &[f64; 3]) -> bool {
        let phi = self.base.eval(p);
        match (&self.thresholds, self.kind) {
            (Thresholds::Single(c), PorousKind::Pore) => phi >= c.eval(p),
            (Thresholds::Single(c), _) => phi <= c.eval(p),
            (Thresholds::Pair(c1, c2), _) => c1.eval(p) <= phi && phi <= c2.eval(p),
        }
    }

    /// Check `c₁ ≤ c₂` for sheets at every lattice point; other kinds always pass.
    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        let (kind, thresholds) = (self.kind, &self.thresholds);
        match (kind, thresholds) {
            (PorousKind::Sheet, Thresholds::Pair(c1, c2)) => {
                for p in lattice.points() {
                    if c1.eval(&p) > c2.eval(&p) {
                        return Err(Error::domain(format!("sheet thresholds cross at {p:?}")));
                    }
                }
                Ok(())
            }
            (PorousKind::Sheet, Thresholds::Single(_)) => Err(Error::domain("a sheet needs two thresholds")),
            (_, Thresholds::Pair(..)) => Err(Error::domain("pore and rod take one threshold")),
            _ => Ok(()),
        }
    }
}

/// Signed field whose sub-zero set is exactly the structure.
pub fn normalize_spec(spec: &PorousSpec) -> ScalarField {
    let base = &spec.base;
    match (&spec.thresholds, spec.kind) {
        (Thresholds::Single(c), PorousKind::Pore) => c.sub(base),
        (Thresholds::Single(c), _) => base.sub(c),
        (Thresholds::Pair(c1, c2), _) => {
            let (phi, c1, c2) = (base.clone(), c1.clone(), c2.clone());
            ScalarField::new(phi.bbox(), move |p| {
                let v = phi.eval(p);
                (c1.eval(p) - v).max(v - c2.eval(p))
            })
        }
    }
}
