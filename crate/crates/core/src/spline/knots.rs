use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(a, b, alpha)`: a new coefficient `alpha * P[a] + (1 - alpha) * P[b]`.
pub(crate) type Blend = (usize, usize, f64);

/// Highest supported polynomial degree per axis.
pub const MAX_DEGREE: usize = 7;
pub(crate) const MAX_ORDER: usize = MAX_DEGREE + 1;

/// Nondecreasing knot sequence together with the polynomial degree.
///
/// With `m` knots and degree `p` there are `m - p - 1` basis functions. The
/// evaluation domain is `[knots[p], knots[m - p - 1]]`, which for the clamped
/// vectors used throughout this crate is the full knot range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKnots", into = "RawKnots")]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

#[derive(Serialize, Deserialize)]
struct RawKnots {
    degree: usize,
    knots: Vec<f64>,
}

impl TryFrom<RawKnots> for KnotVector {
    type Error = Error;

    fn try_from(raw: RawKnots) -> Result<Self> {
        KnotVector::new(raw.knots, raw.degree)
    }
}

impl From<KnotVector> for RawKnots {
    fn from(kv: KnotVector) -> Self {
        RawKnots {
            degree: kv.degree,
            knots: kv.knots,
        }
    }
}

impl KnotVector {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::domain(format!("degree {degree} exceeds {MAX_DEGREE}")));
        }
        if knots.len() < degree + 2 {
            return Err(Error::domain(format!(
                "{} knots cannot carry a degree-{degree} basis",
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::domain("knots must be finite"));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("knots must be nondecreasing"));
        }
        let kv = KnotVector { knots, degree };
        let (lo, hi) = kv.domain();
        if !(lo < hi) {
            return Err(Error::domain("knot vector has an empty evaluation domain"));
        }
        Ok(kv)
    }

    /// Clamped knot vector with uniformly spaced interior knots on `[lo, hi]`.
    pub fn clamped_uniform(degree: usize, count: usize, lo: f64, hi: f64) -> Result<Self> {
        if count < degree + 1 {
            return Err(Error::domain(format!(
                "{count} coefficients is fewer than degree + 1 = {}",
                degree + 1
            )));
        }
        if !(lo < hi) {
            return Err(Error::domain(format!("empty parameter interval [{lo}, {hi}]")));
        }
        let segments = count - degree;
        let mut knots = Vec::with_capacity(count + degree + 1);
        knots.extend(std::iter::repeat_n(lo, degree + 1));
        for s in 1..segments {
            knots.push(lo + (hi - lo) * s as f64 / segments as f64);
        }
        knots.extend(std::iter::repeat_n(hi, degree + 1));
        KnotVector::new(knots, degree)
    }

    /// A single constant basis on `[0, 1]`; used for the inert axes of a
    /// univariate weight stored as a volume.
    pub fn constant() -> Self {
        KnotVector {
            knots: vec![0.0, 1.0],
            degree: 0,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn basis_count(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn domain(&self) -> (f64, f64) {
        let m = self.knots.len();
        (self.knots[self.degree], self.knots[m - self.degree - 1])
    }

    pub fn contains(&self, u: f64) -> bool {
        let (lo, hi) = self.domain();
        u >= lo && u <= hi
    }

    /// Closed parameter interval on which basis `i` can be nonzero.
    pub fn support(&self, i: usize) -> (f64, f64) {
        (self.knots[i], self.knots[i + self.degree + 1])
    }

    /// Knot span index `s` with `knots[s] <= u < knots[s + 1]`, clamped so the
    /// right domain end maps to the last nonempty span.
    pub fn find_span(&self, u: f64) -> usize {
        let p = self.degree;
        let n = self.basis_count() - 1;
        if u >= self.knots[n + 1] {
            return n;
        }
        if u <= self.knots[p] {
            return p;
        }
        // Last index in [p, n] whose knot is <= u.
        let idx = self.knots[..=n + 1].partition_point(|&k| k <= u);
        (idx - 1).clamp(p, n)
    }

    /// Nonzero basis values `N_{span-p..=span, p}(u)` written to `out[..=p]`.
    pub(crate) fn basis_funs(&self, span: usize, u: f64, out: &mut [f64; MAX_ORDER]) {
        let p = self.degree;
        let k = &self.knots;
        let mut left = [0.0; MAX_ORDER];
        let mut right = [0.0; MAX_ORDER];
        out[0] = 1.0;
        for j in 1..=p {
            left[j] = u - k[span + 1 - j];
            right[j] = k[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = if denom == 0.0 { 0.0 } else { out[r] / denom };
                out[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            out[j] = saved;
        }
    }

    /// Value of the single basis function `N_{i,p}(u)` by the Cox–de Boor
    /// triangle, with the right domain end closed on the last basis.
    pub fn basis(&self, i: usize, u: f64) -> Result<f64> {
        let n_basis = self.basis_count();
        if i >= n_basis {
            return Err(Error::domain(format!("basis index {i} out of range 0..{n_basis}")));
        }
        let first = self.knots[0];
        let last = *self.knots.last().unwrap();
        if !(u >= first && u <= last) {
            return Err(Error::domain(format!("parameter {u} outside [{first}, {last}]")));
        }
        let p = self.degree;
        let k = &self.knots;
        let (lo, hi) = self.domain();
        if (i == 0 && u == lo && k[0] == lo) || (i == n_basis - 1 && u == hi && last == hi) {
            return Ok(1.0);
        }
        if u < k[i] || u >= k[i + p + 1] {
            return Ok(0.0);
        }
        let mut n = [0.0; MAX_ORDER];
        for (j, nj) in n.iter_mut().enumerate().take(p + 1) {
            *nj = if u >= k[i + j] && u < k[i + j + 1] { 1.0 } else { 0.0 };
        }
        for deg in 1..=p {
            let mut saved = if n[0] == 0.0 {
                0.0
            } else {
                (u - k[i]) * n[0] / (k[i + deg] - k[i])
            };
            for j in 0..(p - deg + 1) {
                let u_left = k[i + j + 1];
                let u_right = k[i + j + deg + 1];
                if n[j + 1] == 0.0 {
                    n[j] = saved;
                    saved = 0.0;
                } else {
                    let temp = n[j + 1] / (u_right - u_left);
                    n[j] = saved + (u_right - u) * temp;
                    saved = (u - u_left) * temp;
                }
            }
        }
        Ok(n[0])
    }

    pub fn multiplicity(&self, u: f64) -> usize {
        self.knots.iter().filter(|&&k| k == u).count()
    }

    /// Insert `u` once (Boehm). Returns the refined vector and, for every new
    /// coefficient index, the blend `(a, b, alpha)` meaning
    /// `Q = alpha * P[a] + (1 - alpha) * P[b]`.
    pub(crate) fn insert(&self, u: f64) -> Result<(KnotVector, Vec<Blend>)> {
        let (lo, hi) = self.domain();
        if !(u > lo && u < hi) {
            return Err(Error::domain(format!(
                "knot {u} not strictly inside the parameter interval ({lo}, {hi})"
            )));
        }
        let p = self.degree;
        let s = self.multiplicity(u);
        if s + 1 > p {
            return Err(Error::domain(format!(
                "inserting {u} would raise its multiplicity above the degree {p}"
            )));
        }
        let k = self.knots.partition_point(|&x| x <= u) - 1;
        let n_old = self.basis_count();
        let mut rules = Vec::with_capacity(n_old + 1);
        for i in 0..=n_old {
            if i + p <= k {
                rules.push((i, i, 1.0));
            } else if i + s <= k {
                let alpha = (u - self.knots[i]) / (self.knots[i + p] - self.knots[i]);
                rules.push((i, i - 1, alpha));
            } else {
                rules.push((i - 1, i - 1, 1.0));
            }
        }
        let mut knots = self.knots.clone();
        knots.insert(k + 1, u);
        Ok((KnotVector { knots, degree: p }, rules))
    }
}
