//! Implicit scalar fields, porous structure conventions and regions.

mod expression;
mod image;
mod porous;
mod region;
mod tpms;

use std::fmt;
use std::sync::Arc;

pub use expression::expression_field;
pub use image::{image_region, GrayImage};
pub use porous::{normalize_spec, PorousKind, PorousSpec, Thresholds};
pub use region::{dilate_region_boundary, Region};
pub use tpms::{tpms, TpmsKind};

use crate::geometry::{Aabb, Point};
use crate::init::WeightFunction;

type FieldFn = dyn Fn(&Point) -> f64 + Send + Sync;

/// A real function of space together with the box it is meant to be
/// sampled on. Cloning is cheap; the function is shared.
#[derive(Clone)]
pub struct ScalarField {
    f: Arc<FieldFn>,
    bbox: Aabb,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField").field("bbox", &self.bbox).finish_non_exhaustive()
    }
}

impl ScalarField {
    pub fn new(bbox: Aabb, f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField { f: Arc::new(f), bbox }
    }

    pub fn constant(value: f64, bbox: Aabb) -> Self {
        ScalarField::new(bbox, move |_| value)
    }

    #[inline]
    pub fn eval(&self, p: &Point) -> f64 {
        (self.f)(p)
    }

    pub fn bbox(&self) -> Aabb {
        self.bbox
    }

    pub fn with_bbox(&self, bbox: Aabb) -> Self {
        ScalarField { f: self.f.clone(), bbox }
    }

    pub fn map(&self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let f = self.f.clone();
        ScalarField::new(self.bbox, move |p| g(f(p)))
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    /// Pointwise combination; the box is the union of both boxes.
    pub fn zip(&self, other: &ScalarField, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        let (a, b) = (self.f.clone(), other.f.clone());
        ScalarField::new(self.bbox.union(&other.bbox), move |p| g(a(p), b(p)))
    }

    pub fn max(&self, other: &ScalarField) -> Self {
        self.zip(other, f64::max)
    }

    pub fn min(&self, other: &ScalarField) -> Self {
        self.zip(other, f64::min)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip(other, |a, b| a - b)
    }
}

/// `(1 - ω) · left + ω · right`, with ω read from the weight function.
pub fn blended_field(omega: Arc<WeightFunction>, left: &ScalarField, right: &ScalarField) -> ScalarField {
    let (l, r) = (left.f.clone(), right.f.clone());
    let bbox = left.bbox.union(&right.bbox);
    ScalarField::new(bbox, move |p| {
        let w = omega.eval(p);
        (1.0 - w) * l(p) + w * r(p)
    })
}

/// The model-clipped field `max(φ, φ_M)`.
pub fn clip_to_model(phi: &ScalarField, model: &ScalarField) -> ScalarField {
    let (a, b) = (phi.f.clone(), model.f.clone());
    ScalarField::new(phi.bbox, move |p| a(p).max(b(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clip_with_very_negative_model_is_identity() {
        let phi = ScalarField::new(Aabb::unit(), |p| p[0] - 0.3 * p[1]);
        let clipped = clip_to_model(&phi, &ScalarField::constant(-1e9, Aabb::unit()));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = [rng.random(), rng.random(), rng.random()];
            assert_eq!(clipped.eval(&p), phi.eval(&p));
        }
    }

    #[test]
    fn clip_outside_sphere_is_positive() {
        let phi = ScalarField::constant(-1.0, Aabb::unit());
        let sphere = ScalarField::new(Aabb::unit(), |p| {
            ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) + (p[2] - 0.5).powi(2)).sqrt() - 0.3
        });
        let clipped = clip_to_model(&phi, &sphere);
        assert!(clipped.eval(&[0.95, 0.95, 0.95]) > 0.0);
        assert_eq!(clipped.eval(&[0.5, 0.5, 0.5]), -0.3);
    }
}
