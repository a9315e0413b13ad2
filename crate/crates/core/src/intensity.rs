//! First-order analysis: kernel intensity surfaces over the study window.
//!
//! The smoothing kernel is the quadratic kernel
//! `f(u) = (1 - u^2/2)^2` on `|u| <= sqrt(2)`, zero outside. Two surface
//! variants are exposed:
//!
//! * `Raw` - `h0^-1 * sum_i f(d_i / h0)`, the classical scaled kernel sum;
//! * `Normalized` - the kernel is treated as a planar density with mass 1
//!   on its support disk (prefactor `3 / (2 pi h0^2)`), so the surface
//!   integrates to `n` when the pattern keeps `sqrt(2) h0` clear of the
//!   boundary. This is the variant intensity ratios default to.
//!
//! No boundary correction is applied; values near the window edge are
//! biased low, which is a documented property of the estimator.

use rayon::prelude::*;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Point, StudyWindow};
use crate::patterns::PointPattern;

/// Quadratic smoothing kernel; even, `f(0) = 1`, support `[-sqrt2, sqrt2]`.
pub fn quadratic_kernel(u: f64) -> f64 {
    let w = 1.0 - u * u / 2.0;
    if w <= 0.0 {
        0.0
    } else {
        w * w
    }
}

/// Planar mass of the quadratic kernel: `2 pi * int_0^sqrt2 f(u) u du`.
pub const KERNEL_PLANAR_MASS: f64 = 2.0 * PI / 3.0;

/// Surface scaling convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntensityVariant {
    /// `h0^-1` prefactor on the plain kernel sum.
    Raw,
    /// Kernel normalized to unit planar mass (`3 / (2 pi h0^2)` prefactor).
    Normalized,
}

/// Rectangular raster aligned to a window's bounding box. `NaN` marks
/// no-data cells (outside a polygon window).
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub origin: Point,
    pub cell_width: f64,
    pub cell_height: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, row 0 at the origin (minimum y).
    pub values: Vec<f64>,
}

impl Raster {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Center of cell `(ix, iy)`.
    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.origin.x + (ix as f64 + 0.5) * self.cell_width,
            self.origin.y + (iy as f64 + 0.5) * self.cell_height,
        )
    }

    pub fn same_geometry(&self, other: &Raster) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.origin == other.origin
            && self.cell_width == other.cell_width
            && self.cell_height == other.cell_height
    }

    /// Midpoint-rule integral over defined cells.
    pub fn integral(&self) -> f64 {
        let cell_area = self.cell_width * self.cell_height;
        self.values
            .iter()
            .filter(|v| !v.is_nan())
            .sum::<f64>()
            * cell_area
    }
}

/// Raster resolution over the window bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { nx: 256, ny: 256 }
    }
}

/// Kernel intensity surface.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensitySurface {
    pub raster: Raster,
    pub bandwidth: f64,
    pub variant: IntensityVariant,
    pub n_events: usize,
    pub warning: Option<String>,
}

/// Evaluate the kernel intensity at one location.
pub fn intensity_at(pattern: &PointPattern, x: Point, h0: f64, variant: IntensityVariant) -> f64 {
    let sum: f64 = pattern
        .points()
        .iter()
        .map(|p| quadratic_kernel(p.distance(&x) / h0))
        .sum();
    match variant {
        IntensityVariant::Raw => sum / h0,
        IntensityVariant::Normalized => sum / (KERNEL_PLANAR_MASS * h0 * h0),
    }
}

/// Kernel intensity surface on a raster over the window bounding box.
///
/// Cells whose centers fall outside a polygon window are no-data. An empty
/// pattern produces an all-zero surface with a warning.
pub fn intensity_estimate(
    pattern: &PointPattern,
    h0: f64,
    grid: GridSpec,
    variant: IntensityVariant,
) -> Result<IntensitySurface> {
    if !h0.is_finite() || h0 <= 0.0 {
        return Err(Error::Config(format!("bandwidth must be positive, got {h0}")));
    }
    if grid.nx == 0 || grid.ny == 0 {
        return Err(Error::Config("intensity grid must be non-empty".into()));
    }
    let window = pattern.window();
    let (lo, hi) = window.bounding_box();
    let cell_width = (hi.x - lo.x) / grid.nx as f64;
    let cell_height = (hi.y - lo.y) / grid.ny as f64;
    let is_polygon = matches!(window, StudyWindow::Polygon(_));

    let values: Vec<f64> = (0..grid.ny)
        .into_par_iter()
        .flat_map_iter(|iy| {
            let pattern = &pattern;
            (0..grid.nx).map(move |ix| {
                let c = Point::new(
                    lo.x + (ix as f64 + 0.5) * cell_width,
                    lo.y + (iy as f64 + 0.5) * cell_height,
                );
                if is_polygon && !pattern.window().contains(c) {
                    f64::NAN
                } else {
                    intensity_at(pattern, c, h0, variant)
                }
            })
        })
        .collect();

    let warning = if pattern.is_empty() {
        Some("empty pattern: intensity surface is identically zero".into())
    } else {
        None
    };

    Ok(IntensitySurface {
        raster: Raster {
            origin: lo,
            cell_width,
            cell_height,
            nx: grid.nx,
            ny: grid.ny,
            values,
        },
        bandwidth: h0,
        variant,
        n_events: pattern.len(),
        warning,
    })
}

/// Cellwise case/control intensity ratio. Control cells below `floor`
/// yield no-data, as do no-data cells in either input.
pub fn intensity_ratio(
    cases: &IntensitySurface,
    controls: &IntensitySurface,
    floor: f64,
) -> Result<Raster> {
    if !cases.raster.same_geometry(&controls.raster) {
        return Err(Error::Config("intensity surfaces have different grids".into()));
    }
    if cases.bandwidth != controls.bandwidth {
        return Err(Error::Config(format!(
            "intensity surfaces have different bandwidths ({} vs {})",
            cases.bandwidth, controls.bandwidth
        )));
    }
    let values = cases
        .raster
        .values
        .iter()
        .zip(&controls.raster.values)
        .map(|(&a, &b)| {
            if a.is_nan() || b.is_nan() || b < floor {
                f64::NAN
            } else {
                a / b
            }
        })
        .collect();
    Ok(Raster {
        values,
        ..cases.raster.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StudyWindow;
    use std::f64::consts::SQRT_2;
    use approx::assert_relative_eq;

    fn single_point_pattern(x: f64, y: f64) -> PointPattern {
        PointPattern::new(vec![Point::new(x, y)], StudyWindow::unit_square()).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert_eq!(quadratic_kernel(0.0), 1.0);
        assert_eq!(quadratic_kernel(1.0), 0.25);
        assert_eq!(quadratic_kernel(SQRT_2), 0.0);
        assert_eq!(quadratic_kernel(2.0), 0.0);
        assert_eq!(quadratic_kernel(-1.0), quadratic_kernel(1.0));
    }

    #[test]
    fn kernel_non_increasing_on_support() {
        let mut prev = quadratic_kernel(0.0);
        for k in 1..=100 {
            let u = SQRT_2 * k as f64 / 100.0;
            let v = quadratic_kernel(u);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn raw_variant_at_event_location() {
        let p = single_point_pattern(0.5, 0.5);
        let h0 = 0.2;
        let v = intensity_at(&p, Point::new(0.5, 0.5), h0, IntensityVariant::Raw);
        assert_relative_eq!(v, 1.0 / h0);
    }

    #[test]
    fn zero_outside_kernel_support() {
        let p = single_point_pattern(0.2, 0.2);
        let h0 = 0.1;
        let v = intensity_at(&p, Point::new(0.9, 0.9), h0, IntensityVariant::Raw);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn normalized_surface_integrates_to_n_for_interior_pattern() {
        // All events at least sqrt(2)*h0 from the boundary.
        let h0 = 0.12;
        let margin = SQRT_2 * h0 + 0.02;
        let pts: Vec<Point> = (0..7)
            .flat_map(|i| {
                (0..7).map(move |j| {
                    Point::new(
                        margin + (1.0 - 2.0 * margin) * i as f64 / 6.0,
                        margin + (1.0 - 2.0 * margin) * j as f64 / 6.0,
                    )
                })
            })
            .collect();
        let n = pts.len() as f64;
        let p = PointPattern::new(pts, StudyWindow::unit_square()).unwrap();
        let surf = intensity_estimate(
            &p,
            h0,
            GridSpec { nx: 512, ny: 512 },
            IntensityVariant::Normalized,
        )
        .unwrap();
        assert_relative_eq!(surf.raster.integral(), n, max_relative = 1e-3);
    }

    #[test]
    fn surface_additivity_raw() {
        let window = StudyWindow::unit_square();
        let a = PointPattern::new(vec![Point::new(0.3, 0.3)], window.clone()).unwrap();
        let b = PointPattern::new(vec![Point::new(0.7, 0.6)], window.clone()).unwrap();
        let both = PointPattern::new(
            vec![Point::new(0.3, 0.3), Point::new(0.7, 0.6)],
            window,
        )
        .unwrap();
        let g = GridSpec { nx: 32, ny: 32 };
        let sa = intensity_estimate(&a, 0.2, g, IntensityVariant::Raw).unwrap();
        let sb = intensity_estimate(&b, 0.2, g, IntensityVariant::Raw).unwrap();
        let sab = intensity_estimate(&both, 0.2, g, IntensityVariant::Raw).unwrap();
        for i in 0..sab.raster.values.len() {
            assert_relative_eq!(
                sab.raster.values[i],
                sa.raster.values[i] + sb.raster.values[i],
                max_relative = 1e-12,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn ratio_identical_surfaces_is_one() {
        let p = single_point_pattern(0.5, 0.5);
        let g = GridSpec { nx: 16, ny: 16 };
        let s = intensity_estimate(&p, 0.3, g, IntensityVariant::Normalized).unwrap();
        let r = intensity_ratio(&s, &s, 1e-12).unwrap();
        for &v in &r.values {
            if !v.is_nan() {
                assert_relative_eq!(v, 1.0);
            }
        }
    }

    #[test]
    fn ratio_zero_control_cell_is_no_data() {
        let window = StudyWindow::unit_square();
        let cases = PointPattern::new(vec![Point::new(0.1, 0.1)], window.clone()).unwrap();
        let controls = PointPattern::new(vec![Point::new(0.9, 0.9)], window).unwrap();
        let g = GridSpec { nx: 16, ny: 16 };
        let sc = intensity_estimate(&cases, 0.05, g, IntensityVariant::Normalized).unwrap();
        let sk = intensity_estimate(&controls, 0.05, g, IntensityVariant::Normalized).unwrap();
        let r = intensity_ratio(&sc, &sk, 1e-12).unwrap();
        // Control intensity vanishes near (0.1, 0.1), so the ratio there is no-data.
        let near_case = r.values[ndx(0.1, 16) * 16 + ndx(0.1, 16)];
        assert!(near_case.is_nan());
    }

    fn ndx(coord: f64, n: usize) -> usize {
        ((coord * n as f64) as usize).min(n - 1)
    }

    #[test]
    fn doubled_cases_give_ratio_two() {
        let window = StudyWindow::unit_square();
        let pts = vec![Point::new(0.5, 0.5), Point::new(0.4, 0.6)];
        let controls = PointPattern::new(pts.clone(), window.clone()).unwrap();
        let mut doubled = pts.clone();
        doubled.extend(pts);
        let cases = PointPattern::new(doubled, window).unwrap();
        let g = GridSpec { nx: 32, ny: 32 };
        let sc = intensity_estimate(&cases, 0.3, g, IntensityVariant::Normalized).unwrap();
        let sk = intensity_estimate(&controls, 0.3, g, IntensityVariant::Normalized).unwrap();
        let r = intensity_ratio(&sc, &sk, 1e-9).unwrap();
        for &v in &r.values {
            if !v.is_nan() {
                assert_relative_eq!(v, 2.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn ratio_mismatched_grids_is_config_error() {
        let p = single_point_pattern(0.5, 0.5);
        let a = intensity_estimate(&p, 0.2, GridSpec { nx: 16, ny: 16 }, IntensityVariant::Raw)
            .unwrap();
        let b = intensity_estimate(&p, 0.2, GridSpec { nx: 8, ny: 8 }, IntensityVariant::Raw)
            .unwrap();
        assert!(matches!(
            intensity_ratio(&a, &b, 1e-9),
            Err(Error::Config(_))
        ));
        let c = intensity_estimate(&p, 0.3, GridSpec { nx: 16, ny: 16 }, IntensityVariant::Raw)
            .unwrap();
        assert!(matches!(
            intensity_ratio(&a, &c, 1e-9),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bad_bandwidth_is_config_error() {
        let p = single_point_pattern(0.5, 0.5);
        assert!(matches!(
            intensity_estimate(&p, 0.0, GridSpec::default(), IntensityVariant::Raw),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn empty_pattern_gives_zero_surface_with_warning() {
        let p = PointPattern::new(vec![], StudyWindow::unit_square()).unwrap();
        let s = intensity_estimate(&p, 0.1, GridSpec { nx: 8, ny: 8 }, IntensityVariant::Raw)
            .unwrap();
        assert!(s.warning.is_some());
        assert!(s.raster.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn polygon_no_data_outside_window() {
        let tri = StudyWindow::polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 1.0),
        ])
        .unwrap();
        let p = PointPattern::new(vec![Point::new(0.5, 0.25)], tri).unwrap();
        let s = intensity_estimate(&p, 0.2, GridSpec { nx: 16, ny: 16 }, IntensityVariant::Raw)
            .unwrap();
        // Top corners of the bounding box are outside the triangle.
        assert!(s.raster.get(0, 15).is_nan());
        assert!(s.raster.get(15, 15).is_nan());
        assert!(!s.raster.get(8, 2).is_nan());
    }

    #[test]
    fn translation_equivariance() {
        let p = PointPattern::new(
            vec![Point::new(0.3, 0.4), Point::new(0.6, 0.7)],
            StudyWindow::unit_square(),
        )
        .unwrap();
        let shifted = PointPattern::new(
            vec![Point::new(2.3, 3.4), Point::new(2.6, 3.7)],
            StudyWindow::rectangle(2.0, 3.0, 3.0, 4.0).unwrap(),
        )
        .unwrap();
        let g = GridSpec { nx: 24, ny: 24 };
        let s1 = intensity_estimate(&p, 0.2, g, IntensityVariant::Normalized).unwrap();
        let s2 = intensity_estimate(&shifted, 0.2, g, IntensityVariant::Normalized).unwrap();
        for (a, b) in s1.raster.values.iter().zip(&s2.raster.values) {
            assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-12);
        }
    }
}
