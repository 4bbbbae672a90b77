//! Static 3-d tree for nearest-neighbour distance queries.

use crate::geometry::{squared_distance, Point};

/// Immutable KD-tree over a point set. Duplicate points are removed on build.
#[derive(Clone, Debug)]
pub struct KdTree {
    points: Vec<Point>,
    // Implicit balanced layout: the median of `points[lo..hi]` is the node,
    // split axis chosen by depth.
}

impl KdTree {
    pub fn build(mut points: Vec<Point>) -> Self {
        points.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        points.dedup();
        let n = points.len();
        build_rec(&mut points, 0, n, 0);
        KdTree { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nearest stored point and its Euclidean distance, or `None` when empty.
    pub fn nearest(&self, q: &Point) -> Option<(Point, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(q, 0, self.points.len(), 0, &mut best);
        Some((self.points[best.0], best.1.sqrt()))
    }

    pub fn nearest_distance(&self, q: &Point) -> f64 {
        self.nearest(q).map_or(f64::INFINITY, |(_, d)| d)
    }

    fn search(&self, q: &Point, lo: usize, hi: usize, depth: usize, best: &mut (usize, f64)) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let axis = depth % 3;
        let p = &self.points[mid];
        let d2 = squared_distance(p, q);
        if d2 < best.1 {
            *best = (mid, d2);
        }
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, near.0, near.1, depth + 1, best);
        if diff * diff < best.1 {
            self.search(q, far.0, far.1, depth + 1, best);
        }
    }
}

fn build_rec(points: &mut [Point], lo: usize, hi: usize, depth: usize) {
    if hi - lo <= 1 {
        return;
    }
    let axis = depth % 3;
    let mid = lo + (hi - lo) / 2;
    points[lo..hi].select_nth_unstable_by(mid - lo, |a, b| a[axis].total_cmp(&b[axis]));
    build_rec(points, lo, mid, depth + 1);
    build_rec(points, mid + 1, hi, depth + 1);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force_on_lattice_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // Lattice points share coordinates heavily; include duplicates too.
        let mut pts = Vec::new();
        for i in 0..12 {
            for j in 0..12 {
                for k in 0..3 {
                    pts.push([i as f64 * 0.1, j as f64 * 0.1, k as f64 * 0.5]);
                }
            }
        }
        pts.extend(pts.clone().into_iter().take(50));
        let tree = KdTree::build(pts.clone());
        assert_eq!(tree.len(), 12 * 12 * 3);
        for _ in 0..500 {
            let q = [rng.random_range(-0.5..1.6), rng.random_range(-0.5..1.6), rng.random_range(-0.5..1.5)];
            let brute = pts
                .iter()
                .map(|p| squared_distance(p, &q))
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            assert!((tree.nearest_distance(&q) - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_tree() {
        let tree = KdTree::build(Vec::new());
        assert!(tree.nearest(&[0.0; 3]).is_none());
        assert_eq!(tree.nearest_distance(&[0.0; 3]), f64::INFINITY);
    }
}
