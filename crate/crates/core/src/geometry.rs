//! Study windows, pairwise separations, and edge-correction factors.
//!
//! The spatial correction `w` for an event pair is the reciprocal of the
//! proportion of the circle centred at the first event, with radius equal
//! to the pair distance, that lies inside the study window. The temporal
//! correction `v` is 1 when the lag interval of length `2u` centred at the
//! first event's time lies strictly inside `(0, T)` and 2 otherwise.
//!
//! Rectangle windows use the closed-form arc proportion; polygon windows
//! classify the circle's boundary into inside/outside arcs from its exact
//! intersections with the polygon edges.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::patterns::STPattern;

/// A planar location in window coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Arc proportions below this floor have their weight clamped to its
/// reciprocal; clamped pairs are counted in estimator diagnostics.
pub const WEIGHT_PROPORTION_FLOOR: f64 = 1e-3;

/// Bounded planar observation region.
#[derive(Debug, Clone, PartialEq)]
pub enum StudyWindow {
    Rectangle {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
    Polygon(PolygonWindow),
}

/// A simple (non-self-intersecting) polygon, stored counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonWindow {
    vertices: Vec<Point>,
    area: f64,
}

impl StudyWindow {
    /// Axis-aligned rectangular window.
    pub fn rectangle(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        if !(x_min.is_finite() && y_min.is_finite() && x_max.is_finite() && y_max.is_finite()) {
            return Err(Error::Config("window bounds must be finite".into()));
        }
        if x_min >= x_max || y_min >= y_max {
            return Err(Error::Config(format!(
                "degenerate rectangle: [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(StudyWindow::Rectangle {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// The unit square `[0, 1]^2`.
    pub fn unit_square() -> Self {
        StudyWindow::Rectangle {
            x_min: 0.0,
            y_min: 0.0,
            x_max: 1.0,
            y_max: 1.0,
        }
    }

    /// Simple polygon window. Vertices may be given in either orientation;
    /// they are normalized to counter-clockwise. The closing edge from the
    /// last vertex back to the first is implied.
    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Config("polygon needs at least 3 vertices".into()));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Config("polygon vertices must be finite".into()));
        }
        let mut verts = vertices;
        let signed = signed_area(&verts);
        if signed == 0.0 {
            return Err(Error::Config("polygon has zero area".into()));
        }
        if signed < 0.0 {
            verts.reverse();
        }
        if self_intersects(&verts) {
            return Err(Error::Config("polygon is self-intersecting".into()));
        }
        let area = signed.abs();
        Ok(StudyWindow::Polygon(PolygonWindow {
            vertices: verts,
            area,
        }))
    }

    /// Window area `|A|`.
    pub fn area(&self) -> f64 {
        match self {
            StudyWindow::Rectangle {
                x_min,
                y_min,
                x_max,
                y_max,
            } => (x_max - x_min) * (y_max - y_min),
            StudyWindow::Polygon(p) => p.area,
        }
    }

    /// Closed membership test: boundary points belong to the window.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            StudyWindow::Rectangle {
                x_min,
                y_min,
                x_max,
                y_max,
            } => p.x >= *x_min && p.x <= *x_max && p.y >= *y_min && p.y <= *y_max,
            StudyWindow::Polygon(poly) => point_in_polygon(p, &poly.vertices),
        }
    }

    /// Axis-aligned bounding box as (lower-left, upper-right).
    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            StudyWindow::Rectangle {
                x_min,
                y_min,
                x_max,
                y_max,
            } => (Point::new(*x_min, *y_min), Point::new(*x_max, *y_max)),
            StudyWindow::Polygon(poly) => {
                let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in &poly.vertices {
                    lo.x = lo.x.min(v.x);
                    lo.y = lo.y.min(v.y);
                    hi.x = hi.x.max(v.x);
                    hi.y = hi.y.max(v.y);
                }
                (lo, hi)
            }
        }
    }

    /// Largest distance between two window points. For polygons this is the
    /// maximal vertex separation; for rectangles the diagonal.
    pub fn diameter(&self) -> f64 {
        match self {
            StudyWindow::Rectangle {
                x_min,
                y_min,
                x_max,
                y_max,
            } => (x_max - x_min).hypot(y_max - y_min),
            StudyWindow::Polygon(poly) => {
                let v = &poly.vertices;
                let mut best: f64 = 0.0;
                for i in 0..v.len() {
                    for j in (i + 1)..v.len() {
                        best = best.max(v[i].distance(&v[j]));
                    }
                }
                best
            }
        }
    }

    /// Polygon vertices, if this is a polygon window.
    pub fn vertices(&self) -> Option<&[Point]> {
        match self {
            StudyWindow::Rectangle { .. } => None,
            StudyWindow::Polygon(p) => Some(&p.vertices),
        }
    }
}

/// Temporal observation interval `(0, T)` with a declared resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    t_max: f64,
    resolution: TimeResolution,
}

/// Unit in which time offsets of a pattern are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeResolution {
    Year,
    Month,
    Week,
    Day,
    Abstract,
}

impl TimeResolution {
    /// Mean length in days; `None` for abstract units.
    pub fn days(&self) -> Option<f64> {
        match self {
            TimeResolution::Year => Some(365.2425),
            TimeResolution::Month => Some(365.2425 / 12.0),
            TimeResolution::Week => Some(7.0),
            TimeResolution::Day => Some(1.0),
            TimeResolution::Abstract => None,
        }
    }
}

impl TimeWindow {
    /// Interval `(0, t_max)` in the given resolution unit.
    pub fn new(t_max: f64, resolution: TimeResolution) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::Config(format!(
                "time window length must be positive, got {t_max}"
            )));
        }
        Ok(TimeWindow { t_max, resolution })
    }

    /// Interval length `T`.
    pub fn length(&self) -> f64 {
        self.t_max
    }

    pub fn resolution(&self) -> TimeResolution {
        self.resolution
    }

    /// Closed membership: `t` within `[0, T]`.
    pub fn contains(&self, t: f64) -> bool {
        t >= 0.0 && t <= self.t_max
    }
}

/// Spatial and temporal separation of one ordered event pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSeparation {
    /// Euclidean distance between the two locations.
    pub distance: f64,
    /// Absolute difference of the two event times.
    pub time_lag: f64,
}

/// Spatial edge weight together with its clamp flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeWeight {
    /// `1 / p`, where `p` is the in-window proportion of the circle.
    pub weight: f64,
    /// Set when `p` fell below [`WEIGHT_PROPORTION_FLOOR`] and the weight
    /// was clamped to the floor's reciprocal.
    pub clamped: bool,
}

/// Isotropic edge-correction weight: the reciprocal of the proportion of
/// the circle of the given center and radius lying inside the window.
///
/// The center must belong to the (closed) window; a fully interior circle
/// yields exactly 1.
pub fn spatial_edge_weight(center: Point, radius: f64, window: &StudyWindow) -> Result<EdgeWeight> {
    if !window.contains(center) {
        return Err(Error::Domain(format!(
            "circle center ({}, {}) outside study window",
            center.x, center.y
        )));
    }
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    let proportion = match window {
        StudyWindow::Rectangle {
            x_min,
            y_min,
            x_max,
            y_max,
        } => rectangle_arc_proportion(center, radius, *x_min, *y_min, *x_max, *y_max),
        StudyWindow::Polygon(poly) => polygon_arc_proportion(center, radius, &poly.vertices),
    };
    if proportion < WEIGHT_PROPORTION_FLOOR {
        Ok(EdgeWeight {
            weight: 1.0 / WEIGHT_PROPORTION_FLOOR,
            clamped: true,
        })
    } else {
        Ok(EdgeWeight {
            weight: 1.0 / proportion,
            clamped: false,
        })
    }
}

/// Temporal edge factor: 1 when `(t_i - u, t_i + u)` lies strictly inside
/// `(0, T)`, 2 otherwise. Interval ends exactly on 0 or `T` count as
/// outside (open-interval rule).
pub fn temporal_edge_factor(t_i: f64, lag: f64, window: &TimeWindow) -> Result<f64> {
    if !window.contains(t_i) {
        return Err(Error::Domain(format!(
            "event time {t_i} outside [0, {}]",
            window.length()
        )));
    }
    if lag < 0.0 {
        return Err(Error::Domain(format!("time lag must be >= 0, got {lag}")));
    }
    if t_i - lag > 0.0 && t_i + lag < window.length() {
        Ok(1.0)
    } else {
        Ok(2.0)
    }
}

/// All ordered pair separations of a spatio-temporal pattern, enumerated
/// i-major with the diagonal excluded.
pub fn pairwise_separations(pattern: &STPattern) -> Result<Vec<PairSeparation>> {
    let n = pattern.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "pairwise separations need n >= 2, got {n}"
        )));
    }
    let points = pattern.points();
    let times = pattern.times();
    let mut out = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            out.push(PairSeparation {
                distance: points[i].distance(&points[j]),
                time_lag: (times[i] - times[j]).abs(),
            });
        }
    }
    Ok(out)
}

/// Closed-form in-window proportion of a circle inside a rectangle.
///
/// The directions pointing beyond each edge form one arc per edge; arcs of
/// adjacent edges overlap exactly in the corner quadrant, and arcs of
/// opposite edges never overlap, so inclusion-exclusion over edges and
/// corners is exact for any center inside the rectangle.
fn rectangle_arc_proportion(
    center: Point,
    radius: f64,
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
) -> f64 {
    let left = (center.x - x_min).max(0.0);
    let right = (x_max - center.x).max(0.0);
    let bottom = (center.y - y_min).max(0.0);
    let top = (y_max - center.y).max(0.0);

    let mut outside = 0.0;
    for d in [left, right, bottom, top] {
        if d < radius {
            outside += 2.0 * (d / radius).acos();
        }
    }
    for (dx, dy) in [(left, bottom), (left, top), (right, bottom), (right, top)] {
        if dx * dx + dy * dy < radius * radius {
            outside -= (dx / radius).acos() + (dy / radius).acos() - FRAC_PI_2;
        }
    }
    (1.0 - outside / TAU).clamp(0.0, 1.0)
}

/// In-window proportion of a circle inside a simple polygon.
///
/// All circle/edge crossing angles are found by solving the per-edge
/// quadratic, the circle is split into arcs at those angles, and each arc
/// is classified by testing its midpoint against the polygon. Tangencies
/// and vertices on the circle only create empty arcs.
fn polygon_arc_proportion(center: Point, radius: f64, vertices: &[Point]) -> f64 {
    let mut angles: Vec<f64> = Vec::new();
    let m = vertices.len();
    for e in 0..m {
        let a = vertices[e];
        let b = vertices[(e + 1) % m];
        circle_segment_angles(center, radius, a, b, &mut angles);
    }

    if angles.is_empty() {
        let probe = Point::new(center.x + radius, center.y);
        return if point_in_polygon(probe, vertices) {
            1.0
        } else {
            0.0
        };
    }

    angles.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if angles.is_empty() {
        angles.push(0.0);
    }

    let first = angles[0];
    let mut inside = 0.0;
    for k in 0..angles.len() {
        let start = angles[k];
        let end = if k + 1 < angles.len() {
            angles[k + 1]
        } else {
            first + TAU
        };
        let span = end - start;
        if span <= 0.0 {
            continue;
        }
        let mid = start + span / 2.0;
        let probe = Point::new(center.x + radius * mid.cos(), center.y + radius * mid.sin());
        if point_in_polygon(probe, vertices) {
            inside += span;
        }
    }
    (inside / TAU).clamp(0.0, 1.0)
}

/// Push the angles (in `[0, 2pi)`) at which the circle crosses segment
/// `a`-`b`.
fn circle_segment_angles(center: Point, radius: f64, a: Point, b: Point, out: &mut Vec<f64>) {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let fx = a.x - center.x;
    let fy = a.y - center.y;
    let qa = dx * dx + dy * dy;
    if qa == 0.0 {
        return;
    }
    let qb = 2.0 * (fx * dx + fy * dy);
    let qc = fx * fx + fy * fy - radius * radius;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return;
    }
    let sqrt_disc = disc.sqrt();
    for t in [(-qb - sqrt_disc) / (2.0 * qa), (-qb + sqrt_disc) / (2.0 * qa)] {
        if (-1e-12..=1.0 + 1e-12).contains(&t) {
            let px = a.x + t * dx - center.x;
            let py = a.y + t * dy - center.y;
            let mut theta = py.atan2(px);
            if theta < 0.0 {
                theta += TAU;
            }
            out.push(theta);
        }
    }
}

/// Even-odd point-in-polygon test with closed boundary semantics.
fn point_in_polygon(p: Point, vertices: &[Point]) -> bool {
    let m = vertices.len();
    // Boundary points count as inside.
    for e in 0..m {
        let a = vertices[e];
        let b = vertices[(e + 1) % m];
        if on_segment(p, a, b) {
            return true;
        }
    }
    let mut inside = false;
    let mut j = m - 1;
    for i in 0..m {
        let (vi, vj) = (vertices[i], vertices[j]);
        if (vi.y > p.y) != (vj.y > p.y) {
            let x_cross = vj.x + (p.y - vj.y) / (vi.y - vj.y) * (vi.x - vj.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    let scale = (b.x - a.x).hypot(b.y - a.y).max(1.0);
    if cross.abs() > 1e-12 * scale {
        return false;
    }
    let dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
    let len2 = (b.x - a.x).powi(2) + (b.y - a.y).powi(2);
    dot >= -1e-12 && dot <= len2 + 1e-12
}

fn signed_area(vertices: &[Point]) -> f64 {
    let m = vertices.len();
    let mut acc = 0.0;
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

/// O(m^2) proper-intersection check between non-adjacent edges.
fn self_intersects(vertices: &[Point]) -> bool {
    let m = vertices.len();
    for i in 0..m {
        let a1 = vertices[i];
        let a2 = vertices[(i + 1) % m];
        for j in (i + 1)..m {
            // Skip adjacent edges (shared endpoint).
            if j == i || (j + 1) % m == i || (i + 1) % m == j {
                continue;
            }
            let b1 = vertices[j];
            let b2 = vertices[(j + 1) % m];
            if segments_properly_intersect(a1, a2, b1, b2) {
                return true;
            }
        }
    }
    false
}

fn segments_properly_intersect(a1: Point, a2: Point, b1: Point, b2: Point) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Deterministic midpoint arc-sampling estimate of the in-window circle
/// proportion. Independent check of the analytic/intersection routines;
/// absolute error is bounded by `2 / samples`.
pub fn arc_sampling_proportion(
    center: Point,
    radius: f64,
    window: &StudyWindow,
    samples: usize,
) -> f64 {
    let h = TAU / samples as f64;
    let mut inside = 0usize;
    for k in 0..samples {
        let theta = (k as f64 + 0.5) * h;
        let p = Point::new(
            center.x + radius * theta.cos(),
            center.y + radius * theta.sin(),
        );
        if window.contains(p) {
            inside += 1;
        }
    }
    inside as f64 / samples as f64
}

/// Reference value `pi * s^2`: the K-function of complete spatial
/// randomness in the plane.
pub fn csr_k_reference(s: f64) -> f64 {
    PI * s * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_square_polygon() -> StudyWindow {
        StudyWindow::polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn interior_circle_weight_is_exactly_one() {
        let w = StudyWindow::unit_square();
        let ew = spatial_edge_weight(Point::new(0.5, 0.5), 0.1, &w).unwrap();
        assert_eq!(ew.weight, 1.0);
        assert!(!ew.clamped);
    }

    #[test]
    fn corner_circle_weight_is_four() {
        let w = StudyWindow::unit_square();
        let ew = spatial_edge_weight(Point::new(0.0, 0.0), 0.1, &w).unwrap();
        assert_relative_eq!(ew.weight, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn mid_edge_circle_weight_is_two() {
        let w = StudyWindow::unit_square();
        let ew = spatial_edge_weight(Point::new(0.5, 0.0), 0.1, &w).unwrap();
        assert_relative_eq!(ew.weight, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn center_outside_window_is_domain_error() {
        let w = StudyWindow::unit_square();
        let err = spatial_edge_weight(Point::new(1.5, 0.5), 0.1, &w).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn tiny_proportion_is_clamped() {
        // Circle so large that almost none of it stays inside.
        let w = StudyWindow::unit_square();
        let ew = spatial_edge_weight(Point::new(0.5, 0.5), 500.0, &w).unwrap();
        assert!(ew.clamped);
        assert_eq!(ew.weight, 1.0 / WEIGHT_PROPORTION_FLOOR);
    }

    #[test]
    fn rectangle_matches_arc_sampling_oracle() {
        let w = StudyWindow::rectangle(0.0, 0.0, 2.0, 1.0).unwrap();
        let cases = [
            (Point::new(0.31, 0.47), 0.55),
            (Point::new(0.05, 0.93), 0.4),
            (Point::new(1.9, 0.08), 0.25),
            (Point::new(1.0, 0.5), 0.9),
        ];
        for (c, r) in cases {
            let analytic = match &w {
                StudyWindow::Rectangle {
                    x_min,
                    y_min,
                    x_max,
                    y_max,
                } => rectangle_arc_proportion(c, r, *x_min, *y_min, *x_max, *y_max),
                _ => unreachable!(),
            };
            let sampled = arc_sampling_proportion(c, r, &w, 1 << 25);
            assert_relative_eq!(analytic, sampled, max_relative = 1e-6);
        }
    }

    #[test]
    fn polygon_square_agrees_with_rectangle_formula() {
        let poly = unit_square_polygon();
        let rect = StudyWindow::unit_square();
        for (c, r) in [
            (Point::new(0.2, 0.3), 0.35),
            (Point::new(0.5, 0.02), 0.2),
            (Point::new(0.97, 0.97), 0.5),
            (Point::new(0.5, 0.5), 0.49),
        ] {
            let wp = spatial_edge_weight(c, r, &poly).unwrap().weight;
            let wr = spatial_edge_weight(c, r, &rect).unwrap().weight;
            assert_relative_eq!(wp, wr, max_relative = 1e-10);
        }
    }

    #[test]
    fn polygon_matches_arc_sampling_oracle() {
        // Non-convex L-shape.
        let w = StudyWindow::polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ])
        .unwrap();
        for (c, r) in [
            (Point::new(0.5, 0.5), 0.75),
            (Point::new(1.5, 0.5), 0.6),
            (Point::new(0.5, 1.5), 0.8),
            (Point::new(0.9, 0.9), 0.3),
        ] {
            let analytic = spatial_edge_weight(c, r, &w).unwrap().weight;
            let sampled = 1.0 / arc_sampling_proportion(c, r, &w, 10_000_000);
            assert_relative_eq!(analytic, sampled, max_relative = 1e-6);
        }
    }

    #[test]
    fn temporal_factor_basic_cases() {
        let tw = TimeWindow::new(10.0, TimeResolution::Abstract).unwrap();
        assert_eq!(temporal_edge_factor(5.0, 2.0, &tw).unwrap(), 1.0);
        assert_eq!(temporal_edge_factor(1.0, 2.0, &tw).unwrap(), 2.0);
        // Ends exactly on the boundary: open-interval rule gives 2.
        assert_eq!(temporal_edge_factor(5.0, 5.0, &tw).unwrap(), 2.0);
        assert!(matches!(
            temporal_edge_factor(11.0, 1.0, &tw),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn temporal_factor_reflection_invariance() {
        let tw = TimeWindow::new(7.0, TimeResolution::Abstract).unwrap();
        for &(t, u) in &[(0.5, 0.2), (3.0, 2.9), (3.5, 3.5), (6.9, 0.05), (2.0, 5.0)] {
            let a = temporal_edge_factor(t, u, &tw).unwrap();
            let b = temporal_edge_factor(7.0 - t, u, &tw).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn pairwise_separations_hand_cases() {
        use crate::patterns::{PointPattern, STPattern};
        let window = StudyWindow::rectangle(0.0, 0.0, 5.0, 5.0).unwrap();
        let tw = TimeWindow::new(10.0, TimeResolution::Abstract).unwrap();
        let base = PointPattern::new(
            vec![Point::new(0.0, 0.0), Point::new(3.0, 4.0)],
            window.clone(),
        )
        .unwrap();
        let st = STPattern::new(base, vec![1.0, 5.0], tw).unwrap();
        let seps = pairwise_separations(&st).unwrap();
        assert_eq!(seps.len(), 2);
        for s in &seps {
            assert_eq!(s.distance, 5.0);
            assert_eq!(s.time_lag, 4.0);
        }

        // A single event has no pairs.
        let lone = STPattern::new(
            PointPattern::new(vec![Point::new(1.0, 1.0)], window.clone()).unwrap(),
            vec![0.5],
            tw,
        )
        .unwrap();
        assert!(matches!(
            pairwise_separations(&lone),
            Err(Error::InsufficientData(_))
        ));

        // Coincident events are retained with zero separations.
        let dup = STPattern::new(
            PointPattern::new(vec![Point::new(2.0, 2.0), Point::new(2.0, 2.0)], window).unwrap(),
            vec![3.0, 3.0],
            tw,
        )
        .unwrap();
        let seps = pairwise_separations(&dup).unwrap();
        assert_eq!(seps.len(), 2);
        assert!(seps.iter().all(|s| s.distance == 0.0 && s.time_lag == 0.0));
    }

    #[test]
    fn degenerate_polygons_rejected() {
        assert!(StudyWindow::polygon(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).is_err());
        // Bow-tie self intersection.
        assert!(StudyWindow::polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
        .is_err());
        // Collinear, zero area.
        assert!(StudyWindow::polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ])
        .is_err());
    }

    #[test]
    fn polygon_orientation_normalized() {
        let cw = StudyWindow::polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
        ])
        .unwrap();
        assert_relative_eq!(cw.area(), 1.0);
        assert!(cw.contains(Point::new(0.5, 0.5)));
    }

    #[test]
    fn window_membership_is_closed() {
        let rect = StudyWindow::unit_square();
        assert!(rect.contains(Point::new(0.0, 0.5)));
        assert!(rect.contains(Point::new(1.0, 1.0)));
        assert!(!rect.contains(Point::new(1.0 + 1e-9, 1.0)));
        let poly = unit_square_polygon();
        assert!(poly.contains(Point::new(0.0, 0.5)));
        assert!(poly.contains(Point::new(1.0, 1.0)));
        assert!(!poly.contains(Point::new(0.5, 1.1)));
    }
}
