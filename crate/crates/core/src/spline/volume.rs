use serde::{Deserialize, Serialize};

use super::knots::{KnotVector, MAX_ORDER};
use crate::error::{Error, Result};

/// Nonzero tensor-product basis data at one parameter point.
#[derive(Clone, Copy, Debug)]
pub struct LocalBasis {
    /// Index of the first nonzero basis along each axis.
    pub first: [usize; 3],
    /// Number of nonzero bases along each axis (degree + 1).
    pub order: [usize; 3],
    pub weights: [[f64; MAX_ORDER]; 3],
}

/// Trivariate B-spline function with scalar control coefficients.
///
/// Coefficients are stored row-major: `(i, j, k)` lives at
/// `(i * n_v + j) * n_w + k`. A univariate spline is a volume whose v and w
/// axes carry [`KnotVector::constant`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVolume", into = "RawVolume")]
pub struct SplineVolume {
    knots: [KnotVector; 3],
    coefficients: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawVolume {
    degrees: [usize; 3],
    knots: [Vec<f64>; 3],
    counts: [usize; 3],
    coefficients: Vec<f64>,
}

impl TryFrom<RawVolume> for SplineVolume {
    type Error = Error;

    fn try_from(raw: RawVolume) -> Result<Self> {
        let [ku, kv, kw] = raw.knots;
        let knots = [
            KnotVector::new(ku, raw.degrees[0])?,
            KnotVector::new(kv, raw.degrees[1])?,
            KnotVector::new(kw, raw.degrees[2])?,
        ];
        let vol = SplineVolume::new(knots, raw.coefficients)?;
        if vol.counts() != raw.counts {
            return Err(Error::domain(format!(
                "declared counts {:?} disagree with knot vectors {:?}",
                raw.counts,
                vol.counts()
            )));
        }
        Ok(vol)
    }
}

impl From<SplineVolume> for RawVolume {
    fn from(vol: SplineVolume) -> Self {
        let counts = vol.counts();
        let [ku, kv, kw] = vol.knots;
        RawVolume {
            degrees: [ku.degree(), kv.degree(), kw.degree()],
            counts,
            knots: [ku.knots().to_vec(), kv.knots().to_vec(), kw.knots().to_vec()],
            coefficients: vol.coefficients,
        }
    }
}

impl SplineVolume {
    pub fn new(knots: [KnotVector; 3], coefficients: Vec<f64>) -> Result<Self> {
        let expected: usize = knots.iter().map(KnotVector::basis_count).product();
        if coefficients.len() != expected {
            return Err(Error::domain(format!(
                "{} coefficients given, knot vectors need {expected}",
                coefficients.len()
            )));
        }
        Ok(SplineVolume { knots, coefficients })
    }

    pub fn constant(knots: [KnotVector; 3], value: f64) -> Self {
        let n: usize = knots.iter().map(KnotVector::basis_count).product();
        SplineVolume {
            knots,
            coefficients: vec![value; n],
        }
    }

    /// Univariate spline in `u`, constant along v and w.
    pub fn univariate(knots: KnotVector, coefficients: Vec<f64>) -> Result<Self> {
        SplineVolume::new([knots, KnotVector::constant(), KnotVector::constant()], coefficients)
    }

    pub fn knots(&self, axis: usize) -> &KnotVector {
        &self.knots[axis]
    }

    pub fn counts(&self) -> [usize; 3] {
        std::array::from_fn(|a| self.knots[a].basis_count())
    }

    pub fn degrees(&self) -> [usize; 3] {
        std::array::from_fn(|a| self.knots[a].degree())
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    pub fn flat_index(&self, ijk: [usize; 3]) -> usize {
        let c = self.counts();
        (ijk[0] * c[1] + ijk[1]) * c[2] + ijk[2]
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let c = self.counts();
        [flat / (c[1] * c[2]), (flat / c[2]) % c[1], flat % c[2]]
    }

    pub fn coefficient(&self, ijk: [usize; 3]) -> f64 {
        self.coefficients[self.flat_index(ijk)]
    }

    pub fn set_coefficient(&mut self, ijk: [usize; 3], value: f64) {
        let idx = self.flat_index(ijk);
        self.coefficients[idx] = value;
    }

    pub fn domain(&self) -> [(f64, f64); 3] {
        std::array::from_fn(|a| self.knots[a].domain())
    }

    pub fn contains(&self, uvw: [f64; 3]) -> bool {
        (0..3).all(|a| self.knots[a].contains(uvw[a]))
    }

    /// Parametric box on which coefficient `flat` has nonzero basis.
    pub fn support(&self, flat: usize) -> [(f64, f64); 3] {
        let ijk = self.multi_index(flat);
        std::array::from_fn(|a| self.knots[a].support(ijk[a]))
    }

    /// Clamp a parameter point into the parametric box.
    pub fn clamp(&self, uvw: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|a| {
            let (lo, hi) = self.knots[a].domain();
            uvw[a].clamp(lo, hi)
        })
    }

    pub fn local_basis(&self, uvw: [f64; 3]) -> Result<LocalBasis> {
        if !self.contains(uvw) {
            return Err(Error::domain(format!(
                "parameter {uvw:?} outside the parametric box {:?}",
                self.domain()
            )));
        }
        Ok(self.local_basis_unchecked(uvw))
    }

    /// Basis data at a point assumed inside the parametric box; out-of-box
    /// coordinates are clamped.
    pub fn local_basis_unchecked(&self, uvw: [f64; 3]) -> LocalBasis {
        let uvw = self.clamp(uvw);
        let mut lb = LocalBasis {
            first: [0; 3],
            order: [0; 3],
            weights: [[0.0; MAX_ORDER]; 3],
        };
        for a in 0..3 {
            let kv = &self.knots[a];
            let span = kv.find_span(uvw[a]);
            kv.basis_funs(span, uvw[a], &mut lb.weights[a]);
            lb.first[a] = span - kv.degree();
            lb.order[a] = kv.degree() + 1;
        }
        lb
    }

    /// Visit every (flat index, tensor weight) pair of a local basis.
    pub fn for_each_weight(&self, lb: &LocalBasis, mut f: impl FnMut(usize, f64)) {
        let c = self.counts();
        for a in 0..lb.order[0] {
            let wa = lb.weights[0][a];
            let row_i = (lb.first[0] + a) * c[1];
            for b in 0..lb.order[1] {
                let wab = wa * lb.weights[1][b];
                let row_ij = (row_i + lb.first[1] + b) * c[2];
                for g in 0..lb.order[2] {
                    f(row_ij + lb.first[2] + g, wab * lb.weights[2][g]);
                }
            }
        }
    }

    pub fn eval_local(&self, lb: &LocalBasis) -> f64 {
        let mut sum = 0.0;
        self.for_each_weight(lb, |idx, w| sum += w * self.coefficients[idx]);
        sum
    }

    pub fn eval(&self, uvw: [f64; 3]) -> Result<f64> {
        Ok(self.eval_local(&self.local_basis(uvw)?))
    }

    pub fn eval_unchecked(&self, uvw: [f64; 3]) -> f64 {
        self.eval_local(&self.local_basis_unchecked(uvw))
    }

    /// Partial derivatives of the value with respect to each coefficient:
    /// `(flat index, N_i(u) N_j(v) N_k(w))` for every basis whose support holds
    /// the point. Entries with zero weight are omitted.
    pub fn coefficient_gradient(&self, uvw: [f64; 3]) -> Result<Vec<(usize, f64)>> {
        let lb = self.local_basis(uvw)?;
        let mut out = Vec::with_capacity(lb.order.iter().product());
        self.for_each_weight(&lb, |idx, w| {
            if w != 0.0 {
                out.push((idx, w));
            }
        });
        Ok(out)
    }

    /// Insert one knot along `axis`; the function is unchanged.
    pub fn insert_knot(&self, axis: usize, u: f64) -> Result<SplineVolume> {
        if axis > 2 {
            return Err(Error::domain(format!("axis {axis} out of range")));
        }
        let (new_kv, rules) = self.knots[axis].insert(u)?;
        let old = self.counts();
        let mut knots = self.knots.clone();
        knots[axis] = new_kv;
        let mut counts = old;
        counts[axis] += 1;
        let mut coefficients = vec![0.0; counts.iter().product()];
        let old_at = |ijk: [usize; 3]| self.coefficients[(ijk[0] * old[1] + ijk[1]) * old[2] + ijk[2]];
        for i in 0..counts[0] {
            for j in 0..counts[1] {
                for k in 0..counts[2] {
                    let ijk = [i, j, k];
                    let (a, b, alpha) = rules[ijk[axis]];
                    let mut pa = ijk;
                    pa[axis] = a;
                    let mut pb = ijk;
                    pb[axis] = b;
                    let value = if a == b {
                        old_at(pa)
                    } else {
                        alpha * old_at(pa) + (1.0 - alpha) * old_at(pb)
                    };
                    coefficients[(i * counts[1] + j) * counts[2] + k] = value;
                }
            }
        }
        SplineVolume::new(knots, coefficients)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_volume(rng: &mut ChaCha8Rng, counts: [usize; 3], degrees: [usize; 3]) -> SplineVolume {
        let knots = std::array::from_fn(|a| KnotVector::clamped_uniform(degrees[a], counts[a], 0.0, 1.0).unwrap());
        let n = counts.iter().product();
        SplineVolume::new(knots, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn constant_coefficients_give_constant_value() {
        let knots = std::array::from_fn(|_| KnotVector::clamped_uniform(3, 7, 0.0, 1.0).unwrap());
        let vol = SplineVolume::constant(knots, 0.37);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = [rng.random(), rng.random(), rng.random()];
            assert!((vol.eval(p).unwrap() - 0.37).abs() < 1e-14);
        }
    }

    #[test]
    fn univariate_volume_matches_curve_sum() {
        let kv = KnotVector::clamped_uniform(3, 12, 0.0, 1.0).unwrap();
        let coeffs: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let vol = SplineVolume::univariate(kv.clone(), coeffs.clone()).unwrap();
        for step in 0..=50 {
            let u = step as f64 / 50.0;
            let curve: f64 = (0..12).map(|i| kv.basis(i, u).unwrap() * coeffs[i]).sum();
            for vw in [[0.0, 0.0], [0.3, 0.9], [1.0, 1.0]] {
                assert!((vol.eval([u, vw[0], vw[1]]).unwrap() - curve).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn step_coefficients_vanish_on_left_part() {
        // Left half of the coefficients 0, right half 1: any u whose cubic
        // support window only touches zero coefficients evaluates to 0.
        let kv = KnotVector::clamped_uniform(3, 20, 0.0, 1.0).unwrap();
        let coeffs: Vec<f64> = (0..20).map(|i| if i < 10 { 0.0 } else { 1.0 }).collect();
        let vol = SplineVolume::univariate(kv.clone(), coeffs).unwrap();
        // Basis 10 starts at knot 10.
        let first_one = kv.support(10).0;
        for step in 0..200 {
            let u = first_one * step as f64 / 200.0;
            assert_eq!(vol.eval([u, 0.0, 0.0]).unwrap(), 0.0);
        }
        assert!(vol.eval([first_one + 1e-3, 0.0, 0.0]).unwrap() > 0.0);
    }

    #[test]
    fn coefficient_gradient_is_local_and_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vol = random_volume(&mut rng, [9, 8, 7], [3, 3, 3]);
        for _ in 0..50 {
            let p = [rng.random(), rng.random(), rng.random()];
            let g = vol.coefficient_gradient(p).unwrap();
            assert!(g.len() <= 64);
            let sum: f64 = g.iter().map(|e| e.1).sum();
            assert!((sum - 1.0).abs() < 1e-13);
            for &(idx, _) in &g {
                let s = vol.support(idx);
                assert!((0..3).all(|a| p[a] >= s[a].0 && p[a] <= s[a].1));
            }
        }
    }

    #[test]
    fn eval_rejects_out_of_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let vol = random_volume(&mut rng, [4, 4, 4], [2, 2, 2]);
        assert!(vol.eval([1.1, 0.5, 0.5]).is_err());
        assert!(vol.coefficient_gradient([0.5, -0.1, 0.5]).is_err());
        assert!(vol.insert_knot(3, 0.5).is_err());
    }

    #[test]
    fn knot_insertion_at_existing_knot_raises_multiplicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vol = random_volume(&mut rng, [8, 5, 5], [3, 2, 2]);
        let existing = vol.knots(0).knots()[5];
        let before = vol.knots(0).multiplicity(existing);
        let refined = vol.insert_knot(0, existing).unwrap();
        assert_eq!(refined.knots(0).multiplicity(existing), before + 1);
        assert_eq!(refined.counts(), [9, 5, 5]);
        for _ in 0..100 {
            let p = [rng.random(), rng.random(), rng.random()];
            assert!((refined.eval(p).unwrap() - vol.eval(p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let vol = random_volume(&mut rng, [5, 4, 6], [3, 1, 2]);
        let text = vol.to_json().unwrap();
        assert_eq!(SplineVolume::from_json(&text).unwrap(), vol);
        let bad = text.replace("\"counts\":[5,4,6]", "\"counts\":[5,4,7]");
        assert!(SplineVolume::from_json(&bad).is_err());
    }
}
