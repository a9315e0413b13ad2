//! Property tests for the estimator invariants.

use proptest::prelude::*;

use stpp_core::geometry::{
    pairwise_separations, spatial_edge_weight, temporal_edge_factor, Point, StudyWindow,
    TimeResolution, TimeWindow,
};
use stpp_core::intensity::quadratic_kernel;
use stpp_core::patterns::{split_marks, Mark, MarkedPattern, PointPattern, STPattern};
use stpp_core::secondorder::{d_hat, k_hat, DistanceGrid, Normalization};

fn window_points(n: usize) -> impl Strategy<Value = Vec<Point>> {
    proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), n..n + 1)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_is_even_bounded_and_supported(u in -3.0f64..3.0) {
        let v = quadratic_kernel(u);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, quadratic_kernel(-u));
        if u.abs() > std::f64::consts::SQRT_2 {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn interior_weight_is_one(x in 0.3f64..0.7, y in 0.3f64..0.7, r in 1e-6f64..0.29) {
        let w = spatial_edge_weight(Point::new(x, y), r, &StudyWindow::unit_square()).unwrap();
        prop_assert_eq!(w.weight, 1.0);
    }

    #[test]
    fn weight_is_at_least_one(x in 0.0f64..=1.0, y in 0.0f64..=1.0, r in 1e-6f64..1.2) {
        let w = spatial_edge_weight(Point::new(x, y), r, &StudyWindow::unit_square()).unwrap();
        prop_assert!(w.weight >= 1.0 - 1e-12);
    }

    #[test]
    fn temporal_factor_reflection(t in 0.0f64..=10.0, u in 0.0f64..12.0) {
        let tw = TimeWindow::new(10.0, TimeResolution::Abstract).unwrap();
        let a = temporal_edge_factor(t, u, &tw).unwrap();
        let b = temporal_edge_factor(10.0 - t, u, &tw).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn separations_are_permutation_invariant_multisets(
        pts in window_points(8),
        times in proptest::collection::vec(0.0f64..=5.0, 8),
        shift in 1usize..7,
    ) {
        let tw = TimeWindow::new(5.0, TimeResolution::Abstract).unwrap();
        let window = StudyWindow::unit_square();
        let base = PointPattern::new(pts.clone(), window.clone()).unwrap();
        let st = STPattern::new(base, times.clone(), tw).unwrap();

        let mut rotated_pts = pts;
        rotated_pts.rotate_left(shift);
        let mut rotated_times = times;
        rotated_times.rotate_left(shift);
        let st2 = STPattern::new(
            PointPattern::new(rotated_pts, window).unwrap(),
            rotated_times,
            tw,
        )
        .unwrap();

        let key = |p: &stpp_core::geometry::PairSeparation| (p.distance.to_bits(), p.time_lag.to_bits());
        let mut a: Vec<_> = pairwise_separations(&st).unwrap().iter().map(key).collect();
        let mut b: Vec<_> = pairwise_separations(&st2).unwrap().iter().map(key).collect();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn k_invariant_under_reordering(pts in window_points(20), shift in 1usize..19) {
        let window = StudyWindow::unit_square();
        let grid = DistanceGrid::linspace(0.3, 6).unwrap();
        let p1 = PointPattern::new(pts.clone(), window.clone()).unwrap();
        let mut rotated = pts;
        rotated.rotate_left(shift);
        let p2 = PointPattern::new(rotated, window).unwrap();
        let k1 = k_hat(&p1, &grid, Normalization::Unbiased).unwrap();
        let k2 = k_hat(&p2, &grid, Normalization::Unbiased).unwrap();
        for (a, b) in k1.values.iter().zip(&k2.values) {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn k_invariant_under_translation(pts in window_points(15), dx in -3.0f64..3.0, dy in -3.0f64..3.0) {
        let grid = DistanceGrid::linspace(0.25, 5).unwrap();
        let w1 = StudyWindow::unit_square();
        let p1 = PointPattern::new(pts.clone(), w1).unwrap();
        let w2 = StudyWindow::rectangle(dx, dy, dx + 1.0, dy + 1.0).unwrap();
        let moved: Vec<Point> = pts.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect();
        let p2 = PointPattern::new(moved, w2).unwrap();
        let k1 = k_hat(&p1, &grid, Normalization::Unbiased).unwrap();
        let k2 = k_hat(&p2, &grid, Normalization::Unbiased).unwrap();
        for (a, b) in k1.values.iter().zip(&k2.values) {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn d_negates_under_label_swap(pts in window_points(16), case_mask in 3u16..0xFFF0) {
        let window = StudyWindow::unit_square();
        let marks: Vec<Mark> = (0..16)
            .map(|i| if case_mask >> i & 1 == 1 { Mark::Case } else { Mark::Control })
            .collect();
        let n_case = marks.iter().filter(|&&m| m == Mark::Case).count();
        prop_assume!(n_case >= 2 && 16 - n_case >= 2);
        let swapped: Vec<Mark> = marks
            .iter()
            .map(|m| if *m == Mark::Case { Mark::Control } else { Mark::Case })
            .collect();
        let base = PointPattern::new(pts, window).unwrap();
        let grid = DistanceGrid::linspace(0.3, 5).unwrap();
        let d1 = d_hat(&MarkedPattern::new(base.clone(), marks).unwrap(), &grid, Normalization::Unbiased).unwrap();
        let d2 = d_hat(&MarkedPattern::new(base, swapped).unwrap(), &grid, Normalization::Unbiased).unwrap();
        for (a, b) in d1.values.iter().zip(&d2.values) {
            prop_assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn split_preserves_count_and_window(pts in window_points(12), case_mask in 1u16..0xFFE) {
        let window = StudyWindow::unit_square();
        let marks: Vec<Mark> = (0..12)
            .map(|i| if case_mask >> i & 1 == 1 { Mark::Case } else { Mark::Control })
            .collect();
        let n_case = marks.iter().filter(|&&m| m == Mark::Case).count();
        prop_assume!((1..=11).contains(&n_case));
        let marked = MarkedPattern::new(PointPattern::new(pts, window.clone()).unwrap(), marks).unwrap();
        let (cases, controls) = split_marks(&marked).unwrap();
        prop_assert_eq!(cases.len() + controls.len(), 12);
        prop_assert_eq!(cases.window(), &window);

        // Re-merging gives back the original multiset of coordinates.
        let mut merged: Vec<(u64, u64)> = cases
            .points()
            .iter()
            .chain(controls.points())
            .map(|p| (p.x.to_bits(), p.y.to_bits()))
            .collect();
        let mut original: Vec<(u64, u64)> = marked
            .base()
            .points()
            .iter()
            .map(|p| (p.x.to_bits(), p.y.to_bits()))
            .collect();
        merged.sort_unstable();
        original.sort_unstable();
        prop_assert_eq!(merged, original);
    }

    #[test]
    fn k_rigid_motion_with_polygon_window(pts in window_points(14), angle in 0.1f64..1.4) {
        // Rotating points and window together must not change K. The
        // rotated square exercises the polygon arc path against the
        // rectangle closed form.
        let grid = DistanceGrid::linspace(0.25, 4).unwrap();
        let p1 = PointPattern::new(pts.clone(), StudyWindow::unit_square()).unwrap();
        let (sin, cos) = angle.sin_cos();
        let rot = |p: &Point| Point::new(p.x * cos - p.y * sin, p.x * sin + p.y * cos);
        let corners = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let window = StudyWindow::polygon(corners.iter().map(&rot).collect()).unwrap();
        let moved: Vec<Point> = pts.iter().map(&rot).collect();
        let p2 = PointPattern::new(moved, window).unwrap();
        let k1 = k_hat(&p1, &grid, Normalization::Unbiased).unwrap();
        let k2 = k_hat(&p2, &grid, Normalization::Unbiased).unwrap();
        for (a, b) in k1.values.iter().zip(&k2.values) {
            prop_assert!((a - b).abs() <= 1e-7 * a.abs().max(1.0), "{} vs {}", a, b);
        }
    }
}
