//! Exact k-nearest-neighbor search.
//!
//! Results are ordered by `(squared distance, index)`, so ties resolve to the
//! lowest index. The grid path computes distances with the same expression as
//! the brute-force path and returns identical results.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::Vec3;
use crate::math;

/// Largest set searched by brute force under [`SearchStrategy::Auto`].
pub const BRUTE_FORCE_MAX: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchStrategy {
    /// Brute force up to [`BRUTE_FORCE_MAX`] points, grid above.
    #[default]
    Auto,
    Brute,
    Grid,
}

/// A neighbor: index into the indexed set and squared distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist_sq: f64,
}

#[inline]
fn precedes(a: &Neighbor, b: &Neighbor) -> bool {
    a.dist_sq < b.dist_sq || (a.dist_sq == b.dist_sq && a.index < b.index)
}

/// Bounded sorted list of the best `k` candidates seen so far.
struct Best {
    k: usize,
    items: Vec<Neighbor>,
}

impl Best {
    fn new(k: usize) -> Self {
        Self { k, items: Vec::with_capacity(k + 1) }
    }

    fn offer(&mut self, n: Neighbor) {
        if self.items.len() == self.k && !precedes(&n, &self.items[self.k - 1]) {
            return;
        }
        let pos = self.items.partition_point(|m| precedes(m, &n));
        self.items.insert(pos, n);
        self.items.truncate(self.k);
    }

    fn worst(&self) -> Option<f64> {
        (self.items.len() == self.k).then(|| self.items[self.k - 1].dist_sq)
    }
}

struct Grid {
    origin: Vec3,
    cell: f64,
    dims: [usize; 3],
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl Grid {
    fn build(points: &[Vec3]) -> Grid {
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            for a in 0..3 {
                lo = set(lo, a, lo[a].min(p[a]));
                hi = set(hi, a, hi[a].max(p[a]));
            }
        }
        let ext = hi - lo;
        let max_ext = ext.x.max(ext.y).max(ext.z);
        let n = points.len() as f64;
        let cell = if max_ext > 0.0 {
            // Aim for about two points per occupied cell over the non-flat axes.
            let active: Vec<f64> = ext.to_array().into_iter().filter(|e| *e > max_ext * 1e-9).collect();
            let vol: f64 = active.iter().product();
            let mut h = math::exp(math::ln(vol / (0.5 * n)) / active.len() as f64);
            if !(h > 0.0) || !h.is_finite() {
                h = max_ext;
            }
            // Keep the dense cell table within a small multiple of n.
            while cells_for(ext, h).iter().map(|d| *d as f64).product::<f64>() > 4.0 * n + 8.0 {
                h *= 1.25;
            }
            h
        } else {
            1.0
        };
        let dims = cells_for(ext, cell);
        let total = dims[0] * dims[1] * dims[2];
        let mut grid = Grid { origin: lo, cell, dims, starts: vec![0; total + 1], order: vec![0; points.len()] };
        let ids: Vec<usize> = points.iter().map(|p| grid.flat(grid.cell_of(*p))).collect();
        for &c in &ids {
            grid.starts[c + 1] += 1;
        }
        for c in 0..total {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        for (i, &c) in ids.iter().enumerate() {
            grid.order[fill[c]] = i;
            fill[c] += 1;
        }
        grid
    }

    fn cell_of(&self, p: Vec3) -> [i64; 3] {
        let mut c = [0i64; 3];
        for a in 0..3 {
            let v = math::floor((p[a] - self.origin[a]) / self.cell);
            c[a] = if v.is_finite() { v.clamp(-1e15, 1e15) as i64 } else { 0 };
        }
        c
    }

    fn clamp_cell(&self, c: [i64; 3]) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in 0..3 {
            out[a] = c[a].clamp(0, self.dims[a] as i64 - 1) as usize;
        }
        out
    }

    fn flat(&self, c: [i64; 3]) -> usize {
        let c = self.clamp_cell(c);
        (c[2] * self.dims[1] + c[1]) * self.dims[0] + c[0]
    }

    fn knn(&self, points: &[Vec3], q: Vec3, best: &mut Best, exclude: Option<usize>) {
        let qc = self.cell_of(q);
        // Ring index beyond which every grid cell has been visited.
        let mut last = 0i64;
        for a in 0..3 {
            last = last.max((qc[a]).abs()).max((self.dims[a] as i64 - 1 - qc[a]).abs());
        }
        for s in 0..=last {
            let lo: [i64; 3] = core::array::from_fn(|a| (qc[a] - s).max(0));
            let hi: [i64; 3] = core::array::from_fn(|a| (qc[a] + s).min(self.dims[a] as i64 - 1));
            for z in lo[2]..=hi[2] {
                for y in lo[1]..=hi[1] {
                    for x in lo[0]..=hi[0] {
                        let ring = (x - qc[0]).abs().max((y - qc[1]).abs()).max((z - qc[2]).abs());
                        if ring != s {
                            continue;
                        }
                        let c = (z as usize * self.dims[1] + y as usize) * self.dims[0] + x as usize;
                        for &i in &self.order[self.starts[c]..self.starts[c + 1]] {
                            if Some(i) != exclude {
                                best.offer(Neighbor { index: i, dist_sq: (points[i] - q).norm_squared() });
                            }
                        }
                    }
                }
            }
            // Unvisited cells differ from the query cell by at least s + 1 along
            // some axis, i.e. lie at least s * cell away. One cell of slack
            // absorbs floor() rounding at cell boundaries.
            if let Some(w) = best.worst() {
                let bound = (s - 1).max(0) as f64 * self.cell;
                if w < bound * bound * (1.0 - 1e-9) {
                    return;
                }
            }
        }
    }
}

fn set(v: Vec3, axis: usize, value: f64) -> Vec3 {
    let mut a = v.to_array();
    a[axis] = value;
    Vec3::from_array(a)
}

fn cells_for(ext: Vec3, h: f64) -> [usize; 3] {
    core::array::from_fn(|a| (math::floor(ext[a] / h) as usize).saturating_add(1).min(1 << 20))
}

/// Search structure over a borrowed point set.
pub struct NeighborIndex<'a> {
    points: &'a [Vec3],
    grid: Option<Grid>,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(points: &'a [Vec3], strategy: SearchStrategy) -> Self {
        let use_grid = match strategy {
            SearchStrategy::Brute => false,
            SearchStrategy::Grid => true,
            SearchStrategy::Auto => points.len() > BRUTE_FORCE_MAX,
        };
        let grid = (use_grid && !points.is_empty()).then(|| Grid::build(points));
        Self { points, grid }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `k` nearest points to `q`, optionally skipping one index.
    pub fn knn(&self, q: Vec3, k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        if k == 0 {
            return Vec::new();
        }
        let mut best = Best::new(k);
        match &self.grid {
            Some(g) => g.knn(self.points, q, &mut best, exclude),
            None => {
                for (i, p) in self.points.iter().enumerate() {
                    if Some(i) != exclude {
                        best.offer(Neighbor { index: i, dist_sq: (*p - q).norm_squared() });
                    }
                }
            }
        }
        best.items
    }

    pub fn nearest(&self, q: Vec3) -> Option<Neighbor> {
        self.knn(q, 1, None).into_iter().next()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(rng: &mut ChaCha8Rng, n: usize, flat: bool) -> Vec<Vec3> {
        (0..n)
            .map(|_| {
                let z = if flat { 0.5 } else { rng.random_range(-1.0..1.0) };
                Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0), z)
            })
            .collect()
    }

    #[test]
    fn grid_matches_brute() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(n, flat) in &[(1usize, false), (7, false), (500, false), (800, true), (2500, false)] {
            let pts = cloud(&mut rng, n, flat);
            let brute = NeighborIndex::new(&pts, SearchStrategy::Brute);
            let grid = NeighborIndex::new(&pts, SearchStrategy::Grid);
            let mut queries = cloud(&mut rng, 40, false);
            queries.push(Vec3::new(50.0, -30.0, 4.0));
            for q in queries {
                for k in [1, 4, 17] {
                    assert_eq!(brute.knn(q, k, None), grid.knn(q, k, None));
                }
            }
            for i in (0..n).step_by(13) {
                assert_eq!(brute.knn(pts[i], 16, Some(i)), grid.knn(pts[i], 16, Some(i)));
            }
        }
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        // Integer lattice: many exactly equal distances.
        let pts: Vec<Vec3> =
            (0..1000).map(|i| Vec3::new((i % 10) as f64, ((i / 10) % 10) as f64, (i / 100) as f64)).collect();
        let brute = NeighborIndex::new(&pts, SearchStrategy::Brute);
        let grid = NeighborIndex::new(&pts, SearchStrategy::Grid);
        let q = Vec3::new(4.5, 4.5, 4.5);
        let got = grid.knn(q, 8, None);
        assert_eq!(got, brute.knn(q, 8, None));
        let idx: Vec<usize> = got.iter().map(|n| n.index).collect();
        assert_eq!(idx, vec![444, 445, 454, 455, 544, 545, 554, 555]);
        for i in 0..1000 {
            assert_eq!(grid.knn(pts[i], 6, Some(i)), brute.knn(pts[i], 6, Some(i)));
        }
    }

    #[test]
    fn degenerate_sets() {
        let same = vec![Vec3::new(1.0, 1.0, 1.0); 5];
        let g = NeighborIndex::new(&same, SearchStrategy::Grid);
        let idx: Vec<usize> = g.knn(Vec3::ZERO, 3, None).iter().map(|n| n.index).collect();
        assert_eq!(idx, vec![0, 1, 2]);
        assert_eq!(g.knn(Vec3::ZERO, 10, None).len(), 5);
        let empty: Vec<Vec3> = Vec::new();
        assert!(NeighborIndex::new(&empty, SearchStrategy::Grid).nearest(Vec3::ZERO).is_none());
    }
}
