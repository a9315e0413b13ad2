//! Uniform-grid pair search and edge-weighted pair records.
//!
//! The production estimators enumerate ordered pairs within `s_max` through
//! a uniform cell index whose cells are at least `s_max` wide, so a 3x3
//! block of cells covers every candidate neighbor. Enumeration order is
//! fixed (ascending center index, cells scanned bottom-left to top-right,
//! ascending index within a cell), which keeps floating-point accumulation
//! deterministic.
//!
//! Correctness of this path is gated on equivalence with a naive
//! double-loop oracle; see the validation module and integration tests.

use crate::error::Result;
use crate::geometry::{spatial_edge_weight, Point, StudyWindow};

/// One ordered pair `(i, j)` with `d_ij < s_max`, its first qualifying
/// distance-grid bucket, and its isotropic edge weight.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WeightedPair {
    pub i: u32,
    pub j: u32,
    /// Smallest index `k` with `d_ij < s[k]`; always `< s.len()`.
    pub s_bucket: u32,
    pub weight: f64,
}

/// All ordered in-range pairs plus the clamped-weight count.
#[derive(Debug, Clone, Default)]
pub(crate) struct PairSet {
    pub pairs: Vec<WeightedPair>,
    pub clamped: usize,
}

/// Smallest grid index `k` with `value < grid[k]` (strict indicator
/// convention), or `grid.len()` when no bucket qualifies.
#[inline]
pub(crate) fn first_bucket(grid: &[f64], value: f64) -> usize {
    grid.partition_point(|&g| g <= value)
}

pub(crate) fn weighted_pairs(
    points: &[Point],
    window: &StudyWindow,
    s_grid: &[f64],
) -> Result<PairSet> {
    let s_max = *s_grid.last().expect("grid is non-empty");
    let n = points.len();
    let mut out = PairSet {
        pairs: Vec::new(),
        clamped: 0,
    };
    if n < 2 {
        return Ok(out);
    }

    let index = CellIndex::build(points, window, s_max);
    let mut neighbors: Vec<u32> = Vec::new();
    for i in 0..n {
        neighbors.clear();
        index.candidates(points[i], &mut neighbors);
        for &j in &neighbors {
            let j = j as usize;
            if j == i {
                continue;
            }
            let d = points[i].distance(&points[j]);
            let bucket = first_bucket(s_grid, d);
            if bucket >= s_grid.len() {
                continue;
            }
            // Coincident points need no correction: the "circle" is the
            // point itself, fully inside the window.
            let (weight, clamped) = if d == 0.0 {
                (1.0, false)
            } else {
                let ew = spatial_edge_weight(points[i], d, window)?;
                (ew.weight, ew.clamped)
            };
            if clamped {
                out.clamped += 1;
            }
            out.pairs.push(WeightedPair {
                i: i as u32,
                j: j as u32,
                s_bucket: bucket as u32,
                weight,
            });
        }
    }
    Ok(out)
}

/// Uniform cell index over the window bounding box. Cell counts are chosen
/// by rounding down, so each cell is at least `cell_size` wide on both
/// axes and a 3x3 block covers any disk of that radius.
struct CellIndex {
    x0: f64,
    y0: f64,
    wx: f64,
    wy: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl CellIndex {
    fn build(points: &[Point], window: &StudyWindow, cell_size: f64) -> Self {
        let (lo, hi) = window.bounding_box();
        let span_x = (hi.x - lo.x).max(f64::MIN_POSITIVE);
        let span_y = (hi.y - lo.y).max(f64::MIN_POSITIVE);
        let cell = cell_size.max(f64::MIN_POSITIVE);
        let nx = ((span_x / cell).floor() as usize).clamp(1, 2048);
        let ny = ((span_y / cell).floor() as usize).clamp(1, 2048);
        let wx = span_x / nx as f64;
        let wy = span_y / ny as f64;
        let mut index = CellIndex {
            x0: lo.x,
            y0: lo.y,
            wx,
            wy,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        };
        for (idx, p) in points.iter().enumerate() {
            let (cx, cy) = index.cell_of(p);
            index.cells[cy * nx + cx].push(idx as u32);
        }
        index
    }

    fn cell_of(&self, p: &Point) -> (usize, usize) {
        let cx = (((p.x - self.x0) / self.wx).floor() as isize).clamp(0, self.nx as isize - 1);
        let cy = (((p.y - self.y0) / self.wy).floor() as isize).clamp(0, self.ny as isize - 1);
        (cx as usize, cy as usize)
    }

    fn candidates(&self, p: Point, out: &mut Vec<u32>) {
        let (cx, cy) = self.cell_of(&p);
        let x_lo = cx.saturating_sub(1);
        let x_hi = (cx + 1).min(self.nx - 1);
        let y_lo = cy.saturating_sub(1);
        let y_hi = (cy + 1).min(self.ny - 1);
        for gy in y_lo..=y_hi {
            for gx in x_lo..=x_hi {
                out.extend_from_slice(&self.cells[gy * self.nx + gx]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StudyWindow;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn grid_index_finds_every_close_pair() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let window = StudyWindow::unit_square();
        let points: Vec<Point> = (0..150)
            .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let grid = [0.05, 0.1, 0.2, 0.37];
        let set = weighted_pairs(&points, &window, &grid).unwrap();

        let mut expected = 0usize;
        for i in 0..points.len() {
            for j in 0..points.len() {
                if i != j && points[i].distance(&points[j]) < grid[3] {
                    expected += 1;
                }
            }
        }
        assert_eq!(set.pairs.len(), expected);
    }

    #[test]
    fn bucket_convention_is_strict() {
        let grid = [1.0, 2.0, 3.0];
        assert_eq!(first_bucket(&grid, 0.5), 0);
        assert_eq!(first_bucket(&grid, 1.0), 1); // d == s excluded from s's bucket
        assert_eq!(first_bucket(&grid, 2.5), 2);
        assert_eq!(first_bucket(&grid, 3.0), 3); // out of range
    }
}
