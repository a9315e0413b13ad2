//! Oracle checks against synthetic ground truth.
//!
//! Every estimator in this crate is validated against an independent
//! route: closed-form benchmarks (`pi s^2`, `2 pi s^2 t`), naive
//! double-loop re-implementations, deterministic arc sampling, and nested
//! Monte Carlo calibration of the tests themselves. The checks live here
//! (not in test code alone) because the CLI exposes them as the
//! `synth-validate` pipeline.
//!
//! The naive estimators in this module intentionally share nothing with
//! the indexed production path except the scalar edge-weight routine,
//! which has its own sampling oracle.

use rayon::prelude::*;

use rand::Rng;

use crate::error::Result;
use crate::geometry::{
    arc_sampling_proportion, csr_k_reference, spatial_edge_weight, Point, StudyWindow,
    TimeResolution, TimeWindow,
};
use crate::intensity::{intensity_estimate, GridSpec, IntensityVariant};
use crate::patterns::{temporal_histogram, MarkedPattern, PointPattern, STPattern};
use crate::rng::{stream, StreamDomain};
use crate::secondorder::{
    csr_envelope, k_hat, rl_envelope, CsrStatistic, DistanceGrid, Normalization, RlStatistic,
    TimeLagGrid,
};
use crate::spacetime::{
    d_hat_st, interaction_tests, k_hat_space, k_hat_st, k_hat_time, mc_interaction_test,
    residual_grid, uniform_time_envelope, variance_grid,
};
use crate::synth::{generate, GeneratorSpec, IntensityModel, TemporalLaw};

/// One validation check with its verdict.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// What was measured.
    pub observed: String,
    /// What the check requires.
    pub criterion: String,
    pub elapsed: std::time::Duration,
}

impl CheckOutcome {
    fn finish(
        name: &'static str,
        passed: bool,
        observed: String,
        criterion: String,
        started: std::time::Instant,
    ) -> CheckOutcome {
        CheckOutcome {
            name,
            passed,
            observed,
            criterion,
            elapsed: started.elapsed(),
        }
    }
}

/// Trial counts for the full validation run. `quick()` shrinks everything
/// for smoke runs; the defaults match the acceptance suite.
#[derive(Debug, Clone)]
pub struct ValidationConfig {
    pub seed: u64,
    pub csr_replicates: usize,
    pub st_replicates: usize,
    pub oracle_instances: usize,
    pub calibration_trials: usize,
    pub power_trials: usize,
    pub discrimination_trials: usize,
    pub moment_replicates: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            seed: 20120929,
            csr_replicates: 500,
            st_replicates: 200,
            oracle_instances: 50,
            calibration_trials: 400,
            power_trials: 100,
            discrimination_trials: 100,
            moment_replicates: 200,
        }
    }
}

impl ValidationConfig {
    /// Trimmed sizes for smoke runs. The null-calibration and
    /// residual-moment checks keep their full trial counts: their
    /// acceptance windows are too tight to be meaningful with fewer
    /// trials.
    pub fn quick() -> Self {
        ValidationConfig {
            csr_replicates: 100,
            st_replicates: 50,
            oracle_instances: 10,
            power_trials: 25,
            discrimination_trials: 25,
            ..ValidationConfig::default()
        }
    }
}

/// Run the full check table.
pub fn run_all(cfg: &ValidationConfig) -> Vec<CheckOutcome> {
    vec![
        check_edge_correction_exactness(),
        check_edge_weight_oracle(cfg.seed),
        check_origin_identity(),
        check_oracle_equivalence(cfg.oracle_instances, 100, cfg.seed),
        check_csr_k_unbiasedness(cfg.csr_replicates, 200, cfg.seed),
        check_st_benchmark(cfg.st_replicates, 300, cfg.seed),
        check_p_value_mechanics(cfg.seed),
        check_library_determinism(cfg.seed),
        check_mc_null_calibration(cfg.calibration_trials, 100, 199, 99, cfg.seed),
        check_gaussian_null_calibration(cfg.calibration_trials, 100, 99, 99, cfg.seed),
        check_mc_power(cfg.power_trials, cfg.seed),
        check_d_discrimination(cfg.discrimination_trials, cfg.seed),
        check_identical_classes_zero_d(),
        check_thinning_equivalence(500, cfg.seed),
        check_histogram_multinomial(cfg.seed),
        check_rl_calibration(50, cfg.seed),
        check_csr_l_calibration(60, cfg.seed),
        check_uniform_time_calibration(60, cfg.seed),
        check_independent_d_near_zero(cfg.st_replicates, cfg.seed),
        check_residual_null_moments(cfg.moment_replicates, cfg.seed),
        check_thomas_clustering(cfg.seed),
        check_intensity_mass(cfg.seed),
        check_permutation_invariance(cfg.seed),
    ]
}

// ---------------------------------------------------------------------------
// Naive reference implementations (independent of the indexed path).
// ---------------------------------------------------------------------------

/// Direct double-loop K: per grid value, a full indicator sum.
pub fn naive_k_hat(
    pattern: &PointPattern,
    s_values: &[f64],
    normalization: Normalization,
) -> Result<Vec<f64>> {
    let points = pattern.points();
    let n = points.len();
    let window = pattern.window();
    let mut out = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = points[i].distance(&points[j]);
                if d < s {
                    let w = if d == 0.0 {
                        1.0
                    } else {
                        spatial_edge_weight(points[i], d, window)?.weight
                    };
                    acc += w;
                }
            }
        }
        let factor = match normalization {
            Normalization::Unbiased => window.area() / (n as f64 * (n as f64 - 1.0)),
            Normalization::NSquared => window.area() / (n as f64 * n as f64),
        };
        out.push(acc * factor);
    }
    Ok(out)
}

/// Direct triple-loop space-time K, one indicator sum per grid cell.
pub fn naive_k_hat_st(
    pattern: &STPattern,
    s_values: &[f64],
    t_values: &[f64],
) -> Result<Vec<f64>> {
    let points = pattern.points();
    let times = pattern.times();
    let n = points.len();
    let window = pattern.window();
    let t_total = pattern.time_window().length();
    let factor = window.area() * t_total / (n as f64 * (n as f64 - 1.0));
    let mut out = Vec::with_capacity(s_values.len() * t_values.len());
    for &s in s_values {
        for &t in t_values {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let d = points[i].distance(&points[j]);
                    let u = (times[i] - times[j]).abs();
                    if d < s && u < t {
                        let w = if d == 0.0 {
                            1.0
                        } else {
                            spatial_edge_weight(points[i], d, window)?.weight
                        };
                        let v = if times[i] - u > 0.0 && times[i] + u < t_total {
                            1.0
                        } else {
                            2.0
                        };
                        acc += w * v;
                    }
                }
            }
            out.push(acc * factor);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Checks.
// ---------------------------------------------------------------------------

/// Corner, mid-edge, and interior weights are 4 / 2 / 1 to 1e-6, and the
/// 10^6-sample arc oracle agrees with the analytic proportions.
pub fn check_edge_correction_exactness() -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let cases = [
        (Point::new(0.0, 0.0), 4.0),
        (Point::new(0.5, 0.0), 2.0),
        (Point::new(0.5, 0.5), 1.0),
    ];
    let mut worst_weight_err: f64 = 0.0;
    let mut worst_oracle_err: f64 = 0.0;
    for (center, expected) in cases {
        let w = spatial_edge_weight(center, 0.1, &window).unwrap().weight;
        worst_weight_err = worst_weight_err.max((w - expected).abs());
        let oracle_p = arc_sampling_proportion(center, 0.1, &window, 1_000_000);
        worst_oracle_err = worst_oracle_err.max((1.0 / w - oracle_p).abs());
    }
    let passed = worst_weight_err < 1e-6 && worst_oracle_err < 1e-6;
    CheckOutcome::finish(
        "edge-correction-exactness",
        passed,
        format!("weight err {worst_weight_err:.3e}, oracle err {worst_oracle_err:.3e}"),
        "corner/mid-edge/interior = 4/2/1 within 1e-6 of the 1e6-sample arc oracle".into(),
        started,
    )
}

/// Random centers and radii: analytic proportion vs a 2^25-sample arc
/// oracle, relative error < 1e-6.
pub fn check_edge_weight_oracle(seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let mut rng = stream(seed, StreamDomain::Validation, 900);
    let cases: Vec<(Point, f64)> = (0..6)
        .map(|_| {
            (
                Point::new(rng.random::<f64>(), rng.random::<f64>()),
                0.05 + 0.4 * rng.random::<f64>(),
            )
        })
        .collect();
    let worst = cases
        .par_iter()
        .map(|&(c, r)| {
            let analytic = 1.0 / spatial_edge_weight(c, r, &window).unwrap().weight;
            let sampled = arc_sampling_proportion(c, r, &window, 1 << 25);
            ((analytic - sampled) / sampled).abs()
        })
        .reduce(|| 0.0, f64::max);
    CheckOutcome::finish(
        "edge-weight-arc-oracle",
        worst < 1e-6,
        format!("worst relative error {worst:.3e}"),
        "analytic arc proportion within 1e-6 relative of 2^25-sample oracle".into(),
        started,
    )
}

/// `D(0+, 0+) -> 0`: exact zero on the two-event hand case and on the
/// smallest cell of a grid finer than any pair separation.
pub fn check_origin_identity() -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(10.0, TimeResolution::Abstract).unwrap();
    let base = PointPattern::new(
        vec![Point::new(0.35, 0.5), Point::new(0.65, 0.5)],
        window.clone(),
    )
    .unwrap();
    let st = STPattern::new(base, vec![4.0, 6.0], tw).unwrap();
    let s = DistanceGrid::new(vec![0.5]).unwrap();
    let t = TimeLagGrid::new(vec![3.0]).unwrap();
    let k = k_hat_st(&st, &s, &t).unwrap();
    let k1 = k_hat_space(&st, &s).unwrap();
    let k2 = k_hat_time(&st, &t).unwrap();
    let (d, _) = d_hat_st(&k, &k1, &k2).unwrap();
    let hand_zero = d.get(0, 0);

    // Limit case: grid below every pairwise separation.
    let spec = GeneratorSpec::StIndependent {
        n: 40,
        temporal: TemporalLaw::Uniform,
    };
    let p = generate(&spec, &window, Some(&tw), 77).unwrap().into_st().unwrap();
    let s_tiny = DistanceGrid::new(vec![1e-9, 0.3]).unwrap();
    let t_tiny = TimeLagGrid::new(vec![1e-9, 3.0]).unwrap();
    let k = k_hat_st(&p, &s_tiny, &t_tiny).unwrap();
    let k1 = k_hat_space(&p, &s_tiny).unwrap();
    let k2 = k_hat_time(&p, &t_tiny).unwrap();
    let (d, _) = d_hat_st(&k, &k1, &k2).unwrap();
    let limit_zero = d.get(0, 0);

    let passed = hand_zero == 0.0 && limit_zero == 0.0;
    CheckOutcome::finish(
        "origin-identity",
        passed,
        format!("two-event D = {hand_zero}, origin-limit D = {limit_zero}"),
        "D at the origin cell is exactly 0".into(),
        started,
    )
}

/// Naive double-loop K and space-time K match the indexed implementations
/// to relative 1e-12 on random instances.
pub fn check_oracle_equivalence(instances: usize, max_n: usize, seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(10.0, TimeResolution::Abstract).unwrap();
    let worst = (0..instances)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, StreamDomain::Validation, trial as u64);
            let n = 5 + (rng.random::<u64>() as usize) % (max_n - 4);
            let spec = GeneratorSpec::StIndependent {
                n,
                temporal: TemporalLaw::Uniform,
            };
            let st = generate(&spec, &window, Some(&tw), seed ^ (trial as u64 * 7919))
                .unwrap()
                .into_st()
                .unwrap();
            let s = DistanceGrid::linspace(0.05 + 0.3 * rng.random::<f64>(), 6).unwrap();
            let t = TimeLagGrid::linspace(1.0 + 4.0 * rng.random::<f64>(), 5).unwrap();

            let fast_k = k_hat(st.base(), &s, Normalization::Unbiased).unwrap();
            let naive_k = naive_k_hat(st.base(), s.values(), Normalization::Unbiased).unwrap();
            let mut worst = rel_diff_slice(&fast_k.values, &naive_k);

            let fast_kst = k_hat_st(&st, &s, &t).unwrap();
            let naive_kst = naive_k_hat_st(&st, s.values(), t.values()).unwrap();
            worst = worst.max(rel_diff_slice(fast_kst.values(), &naive_kst));
            worst
        })
        .reduce(|| 0.0, f64::max);
    CheckOutcome::finish(
        "brute-force-oracle-equivalence",
        worst < 1e-12,
        format!("worst relative difference {worst:.3e} over {instances} instances"),
        "indexed and naive K / K(s,t) agree to relative 1e-12".into(),
        started,
    )
}

fn rel_diff_slice(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 {
                0.0
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Mean K over CSR replicates within 5% relative of `pi s^2` on
/// `s in [0.02, 0.1]` (unit square), and the run stays under 60 s.
pub fn check_csr_k_unbiasedness(replicates: usize, n: usize, seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let grid = DistanceGrid::new(vec![0.02, 0.04, 0.06, 0.08, 0.10]).unwrap();
    let sums = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let spec = GeneratorSpec::CsrBinomial { n };
            let p = generate(&spec, &window, None, seed.wrapping_add(r as u64))
                .unwrap()
                .into_points()
                .unwrap();
            k_hat(&p, &grid, Normalization::Unbiased).unwrap().values
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(vec![0.0; grid.len()], |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        });
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for (gi, &s) in grid.values().iter().enumerate() {
        let mean = sums[gi] / replicates as f64;
        let expected = csr_k_reference(s);
        let rel = ((mean - expected) / expected).abs();
        worst = worst.max(rel);
        detail.push_str(&format!("s={s}: {rel:.4}; "));
    }
    let elapsed = started.elapsed();
    let passed = worst < 0.05 && elapsed.as_secs_f64() < 60.0;
    CheckOutcome::finish(
        "csr-k-unbiasedness",
        passed,
        format!("worst relative deviation {worst:.4} over {replicates} replicates ({detail})"),
        "mean K within 5% of pi s^2 on s in [0.02, 0.1]; runtime < 60 s".into(),
        started,
    )
}

/// Mean space-time K over independent-component replicates within 7% of
/// `2 pi s^2 t` on the middle of the grid.
pub fn check_st_benchmark(replicates: usize, n: usize, seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(1.0, TimeResolution::Abstract).unwrap();
    let s_grid = DistanceGrid::linspace(0.10, 10).unwrap();
    let t_grid = TimeLagGrid::linspace(0.50, 10).unwrap();
    let cells = s_grid.len() * t_grid.len();
    let sums = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let spec = GeneratorSpec::StIndependent {
                n,
                temporal: TemporalLaw::Uniform,
            };
            let p = generate(&spec, &window, Some(&tw), seed.wrapping_add(r as u64))
                .unwrap()
                .into_st()
                .unwrap();
            k_hat_st(&p, &s_grid, &t_grid).unwrap().values().to_vec()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(vec![0.0; cells], |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        });
    let mut worst = 0.0f64;
    for si in 2..8 {
        for ti in 2..8 {
            let s = s_grid.values()[si];
            let t = t_grid.values()[ti];
            let mean = sums[si * t_grid.len() + ti] / replicates as f64;
            let expected = 2.0 * std::f64::consts::PI * s * s * t;
            worst = worst.max(((mean - expected) / expected).abs());
        }
    }
    CheckOutcome::finish(
        "spacetime-factorization-benchmark",
        worst < 0.07,
        format!("worst mid-grid relative deviation {worst:.4} over {replicates} replicates"),
        "mean K(s,t) within 7% of 2 pi s^2 t on the mid-grid".into(),
        started,
    )
}

/// An observed statistic that ranks first among m = 1000 values reports
/// p = 0.001 exactly.
pub fn check_p_value_mechanics(seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(1.0, TimeResolution::Abstract).unwrap();
    // Strongly interacting data so the observed U dominates every replicate.
    let spec = GeneratorSpec::StInteracting {
        n: 60,
        clusters: 4,
        spatial_sigma: 0.02,
        temporal_sigma: 0.02,
    };
    let p = generate(&spec, &window, Some(&tw), seed ^ 0xABCD)
        .unwrap()
        .into_st()
        .unwrap();
    let s = DistanceGrid::linspace(0.25, 8).unwrap();
    let t = TimeLagGrid::linspace(0.5, 8).unwrap();
    let mc = mc_interaction_test(&p, &s, &t, 1000, 99, seed).unwrap();
    let passed = mc.rank == 1 && mc.p_value == 0.001 && mc.replicates.len() == 999;
    CheckOutcome::finish(
        "p-value-mechanics",
        passed,
        format!(
            "rank {} of m = {}, p = {}, direction {}",
            mc.rank,
            mc.m,
            mc.p_value,
            mc.direction.as_str()
        ),
        "rank 1 of m = 1000 gives p = 0.001 exactly".into(),
        started,
    )
}

/// Identical seeds reproduce the interaction test and exported tables bit
/// for bit.
pub fn check_library_determinism(seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(1.0, TimeResolution::Abstract).unwrap();
    let spec = GeneratorSpec::StIndependent {
        n: 60,
        temporal: TemporalLaw::Uniform,
    };
    let p = generate(&spec, &window, Some(&tw), seed)
        .unwrap()
        .into_st()
        .unwrap();
    let s = DistanceGrid::linspace(0.25, 6).unwrap();
    let t = TimeLagGrid::linspace(0.5, 6).unwrap();
    let a = interaction_tests(&p, &s, &t, 99, 50, seed).unwrap();
    let b = interaction_tests(&p, &s, &t, 99, 50, seed).unwrap();
    let tests_equal =
        a.0.u_observed == b.0.u_observed && a.0.replicates == b.0.replicates && a.1.z == b.1.z;

    let k = k_hat_st(&p, &s, &t).unwrap();
    let mut buf_a = Vec::new();
    let mut buf_b = Vec::new();
    crate::table::write_st_grid(&mut buf_a, &k).unwrap();
    crate::table::write_st_grid(&mut buf_b, &k).unwrap();
    let passed = tests_equal && buf_a == buf_b;
    CheckOutcome::finish(
        "library-determinism",
        passed,
        format!("tests equal: {tests_equal}, table bytes equal: {}", buf_a == buf_b),
        "same seed reproduces statistics and table bytes exactly".into(),
        started,
    )
}

/// Rejection rate of the Monte Carlo test at alpha = 0.05 on independent
/// data stays within [0.03, 0.07].
pub fn check_mc_null_calibration(
    trials: usize,
    n: usize,
    m: usize,
    var_perms: usize,
    seed: u64,
) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(1.0, TimeResolution::Abstract).unwrap();
    let s = DistanceGrid::linspace(0.25, 8).unwrap();
    let t = TimeLagGrid::linspace(0.5, 8).unwrap();
    let rejections: usize = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let spec = GeneratorSpec::StIndependent {
                n,
                temporal: TemporalLaw::Uniform,
            };
            let p = generate(&spec, &window, Some(&tw), seed.wrapping_add(trial as u64 * 31 + 1))
                .unwrap()
                .into_st()
                .unwrap();
            let mc =
                mc_interaction_test(&p, &s, &t, m, var_perms, seed ^ (trial as u64)).unwrap();
            usize::from(mc.p_value <= 0.05)
        })
        .sum();
    let rate = rejections as f64 / trials as f64;
    CheckOutcome::finish(
        "mc-test-null-calibration",
        (0.03..=0.07).contains(&rate),
        format!("rejection rate {rate:.4} over {trials} trials (m = {m})"),
        "null rejection rate at alpha = 0.05 within [0.03, 0.07]".into(),
        started,
    )
}

/// |z| > 1.96 on null data in roughly 5% of trials (tolerance [2.5%, 8%]).
pub fn check_gaussian_null_calibration(
    trials: usize,
    n: usize,
    m: usize,
    var_perms: usize,
    seed: u64,
) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(1.0, TimeResolution::Abstract).unwrap();
    let s = DistanceGrid::linspace(0.25, 8).unwrap();
    let t = TimeLagGrid::linspace(0.5, 8).unwrap();
    let rejections: usize = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let spec = GeneratorSpec::StIndependent {
                n,
                temporal: TemporalLaw::Uniform,
            };
            let p = generate(&spec, &window, Some(&tw), seed.wrapping_add(trial as u64 * 37 + 5))
                .unwrap()
                .into_st()
                .unwrap();
            let (_, gauss) =
                interaction_tests(&p, &s, &t, m, var_perms, seed ^ (trial as u64 * 3)).unwrap();
            usize::from(gauss.z.abs() > 1.96)
        })
        .sum();
    let rate = rejections as f64 / trials as f64;
    CheckOutcome::finish(
        "gaussian-test-null-calibration",
        (0.025..=0.08).contains(&rate),
        format!("|z| > 1.96 rate {rate:.4} over {trials} trials"),
        "null |z| > 1.96 rate within [2.5%, 8%]".into(),
        started,
    )
}

/// Planted space-time interaction is detected with p <= 0.01 in at least
/// 90% of trials.
pub fn check_mc_power(trials: usize, seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(1.0, TimeResolution::Abstract).unwrap();
    let s = DistanceGrid::linspace(0.25, 8).unwrap();
    let t = TimeLagGrid::linspace(0.5, 8).unwrap();
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let spec = GeneratorSpec::StInteracting {
                n: 100,
                clusters: 6,
                spatial_sigma: 0.05,
                temporal_sigma: 0.05,
            };
            let p = generate(&spec, &window, Some(&tw), seed.wrapping_add(trial as u64 * 41 + 3))
                .unwrap()
                .into_st()
                .unwrap();
            let mc =
                mc_interaction_test(&p, &s, &t, 199, 99, seed ^ (trial as u64 * 5)).unwrap();
            usize::from(mc.p_value <= 0.01)
        })
        .sum();
    let rate = hits as f64 / trials as f64;
    CheckOutcome::finish(
        "mc-test-power",
        rate >= 0.90,
        format!("p <= 0.01 in {rate:.3} of {trials} trials"),
        "planted interaction detected (p <= 0.01) in >= 90% of trials".into(),
        started,
    )
}

/// Clustered cases over CSR controls push D above the 95% RL envelope at
/// at least 80% of grid points, in at least 95% of trials.
pub fn check_d_discrimination(trials: usize, seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let grid = DistanceGrid::linspace(0.15, 10).unwrap();
    let successes: usize = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let spec = GeneratorSpec::LabeledSuperposition {
                cases: Box::new(GeneratorSpec::ThomasCluster {
                    parent_rate: 5.0,
                    mean_offspring: 20.0,
                    sigma: 0.03,
                    fixed_n: Some(100),
                }),
                controls: Box::new(GeneratorSpec::CsrBinomial { n: 100 }),
            };
            let marked = generate(&spec, &window, None, seed.wrapping_add(trial as u64 * 13 + 7))
                .unwrap()
                .into_marked()
                .unwrap();
            let runs = rl_envelope(
                &marked,
                &grid,
                RlStatistic::DiggleD,
                39,
                0.95,
                seed ^ (trial as u64 * 11),
            )
            .unwrap();
            let run = &runs[0];
            let env = run.estimate.envelope.as_ref().unwrap();
            let above = run
                .estimate
                .values
                .iter()
                .zip(&env.upper)
                .filter(|(v, u)| v > u)
                .count();
            usize::from(above as f64 >= 0.8 * grid.len() as f64)
        })
        .sum();
    let rate = successes as f64 / trials as f64;
    CheckOutcome::finish(
        "d-function-discrimination",
        rate >= 0.95,
        format!("envelope exceeded at >= 80% of grid points in {rate:.3} of {trials} trials"),
        "cluster-vs-CSR D above the 95% RL envelope at >= 80% of grid points in >= 95% of trials"
            .into(),
        started,
    )
}

/// Identical case and control multisets give D identically zero.
pub fn check_identical_classes_zero_d() -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let pts: Vec<Point> = (0..40)
        .map(|i| {
            let a = i as f64 * 0.618;
            Point::new(a.fract(), (a * 1.33).fract())
        })
        .collect();
    let mut doubled = pts.clone();
    doubled.extend(pts);
    let marks: Vec<crate::patterns::Mark> = (0..80)
        .map(|i| {
            if i < 40 {
                crate::patterns::Mark::Case
            } else {
                crate::patterns::Mark::Control
            }
        })
        .collect();
    let marked = MarkedPattern::new(
        PointPattern::new(doubled, window).unwrap(),
        marks,
    )
    .unwrap();
    let grid = DistanceGrid::linspace(0.2, 8).unwrap();
    let d = crate::secondorder::d_hat(&marked, &grid, Normalization::Unbiased).unwrap();
    let max_abs = d.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    CheckOutcome::finish(
        "identical-classes-zero-d",
        max_abs == 0.0,
        format!("max |D| = {max_abs}"),
        "identical case/control multisets give D = 0 exactly".into(),
        started,
    )
}

/// Thinning a homogeneous process at its own maximum equals the plain
/// Poisson-count generator in distribution (two-sample KS on counts).
pub fn check_thinning_equivalence(draws: usize, seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let rate = 120.0;
    let mut a = Vec::with_capacity(draws);
    let mut b = Vec::with_capacity(draws);
    for r in 0..draws {
        let pc = generate(
            &GeneratorSpec::PoissonCount { rate },
            &window,
            None,
            seed.wrapping_add(r as u64 * 2),
        )
        .unwrap()
        .into_points()
        .unwrap();
        a.push(pc.len() as f64);
        let th = generate(
            &GeneratorSpec::InhomogeneousThinning {
                model: IntensityModel::Constant { value: rate },
                lambda_max: rate,
            },
            &window,
            None,
            seed.wrapping_add(r as u64 * 2 + 1),
        )
        .unwrap()
        .into_points()
        .unwrap();
        b.push(th.len() as f64);
    }
    let (d_stat, p) = two_sample_ks(&a, &b);
    CheckOutcome::finish(
        "thinning-equals-poisson-count",
        p > 0.01,
        format!("KS D = {d_stat:.4}, p = {p:.4} over {draws} draws"),
        "count distributions indistinguishable (KS non-rejection at alpha = 0.01)".into(),
        started,
    )
}

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        let v = x.min(y);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let term = 2.0 * (-1.0f64).powi(k - 1) * (-2.0 * f64::from(k) * f64::from(k) * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    (d, p.clamp(0.0, 1.0))
}

/// Uniform times into 12 month bins: every count within 3 sigma of the
/// multinomial expectation.
pub fn check_histogram_multinomial(seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(12.0, TimeResolution::Month).unwrap();
    let n = 1200usize;
    let spec = GeneratorSpec::StIndependent {
        n,
        temporal: TemporalLaw::Uniform,
    };
    let p = generate(&spec, &window, Some(&tw), seed ^ 0x9999)
        .unwrap()
        .into_st()
        .unwrap();
    let h = temporal_histogram(&p, TimeResolution::Month).unwrap();
    let expectation = n as f64 / 12.0;
    let sigma = (n as f64 * (1.0 / 12.0) * (11.0 / 12.0)).sqrt();
    let worst = h
        .counts
        .iter()
        .map(|&c| (c as f64 - expectation).abs())
        .fold(0.0f64, f64::max);
    let passed = h.counts.len() == 12
        && h.total() as usize == n
        && worst <= 3.0 * sigma;
    CheckOutcome::finish(
        "temporal-histogram-multinomial",
        passed,
        format!("12 bins, worst |count - 100| = {worst:.1} (3 sigma = {:.1})", 3.0 * sigma),
        "uniform times spread over 12 month bins within 3 sigma per bin".into(),
        started,
    )
}

/// Under true random labeling the observed D stays inside the 95% RL
/// envelope at roughly 95% of grid points (mean over trials >= 90%).
pub fn check_rl_calibration(trials: usize, seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let grid = DistanceGrid::linspace(0.2, 8).unwrap();
    let coverages: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            // Clustered superposition, labels assigned at random: the RL
            // null holds by construction.
            let spec = GeneratorSpec::LabeledSuperposition {
                cases: Box::new(GeneratorSpec::CsrBinomial { n: 0 }),
                controls: Box::new(GeneratorSpec::ThomasCluster {
                    parent_rate: 8.0,
                    mean_offspring: 10.0,
                    sigma: 0.05,
                    fixed_n: Some(80),
                }),
            };
            let all_controls = generate(&spec, &window, None, seed.wrapping_add(trial as u64 * 17))
                .unwrap()
                .into_marked()
                .unwrap();
            // Assign 30 case marks uniformly at random.
            let relabeled = {
                let mut marks = vec![crate::patterns::Mark::Control; 80];
                for m in marks.iter_mut().take(30) {
                    *m = crate::patterns::Mark::Case;
                }
                let base = all_controls.base().clone();
                let m = MarkedPattern::new(base, marks).unwrap();
                crate::synth::random_relabel(&m, seed ^ (trial as u64 * 23 + 1))
            };
            let runs = rl_envelope(
                &relabeled,
                &grid,
                RlStatistic::DiggleD,
                39,
                0.95,
                seed ^ (trial as u64 * 29 + 2),
            )
            .unwrap();
            let run = &runs[0];
            let env = run.estimate.envelope.as_ref().unwrap();
            let inside = run
                .estimate
                .values
                .iter()
                .enumerate()
                .filter(|(i, v)| **v >= env.lower[*i] && **v <= env.upper[*i])
                .count();
            inside as f64 / grid.len() as f64
        })
        .collect();
    let mean_coverage = coverages.iter().sum::<f64>() / trials as f64;
    CheckOutcome::finish(
        "rl-envelope-calibration",
        mean_coverage >= 0.90,
        format!("mean in-envelope fraction {mean_coverage:.3} over {trials} trials"),
        "under the RL null, D stays inside the 95% envelope at >= 90% of grid points on average"
            .into(),
        started,
    )
}

/// CSR data stays inside the 99% CSR band at roughly 99% of grid points.
pub fn check_csr_l_calibration(trials: usize, seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let grid = DistanceGrid::linspace(0.2, 8).unwrap();
    let coverages: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let p = generate(
                &GeneratorSpec::CsrBinomial { n: 80 },
                &window,
                None,
                seed.wrapping_add(trial as u64 * 43),
            )
            .unwrap()
            .into_points()
            .unwrap();
            let run = csr_envelope(
                &p,
                &grid,
                CsrStatistic::LMinusS,
                199,
                0.99,
                seed ^ (trial as u64 * 47 + 1),
            )
            .unwrap();
            let env = run.estimate.envelope.as_ref().unwrap();
            let inside = run
                .estimate
                .values
                .iter()
                .enumerate()
                .filter(|(i, v)| **v >= env.lower[*i] && **v <= env.upper[*i])
                .count();
            inside as f64 / grid.len() as f64
        })
        .collect();
    let mean_coverage = coverages.iter().sum::<f64>() / trials as f64;
    CheckOutcome::finish(
        "csr-envelope-calibration",
        mean_coverage >= 0.95,
        format!("mean in-band fraction {mean_coverage:.3} over {trials} trials"),
        "CSR data stays inside the 99% band at >= 95% of grid points on average".into(),
        started,
    )
}

/// Uniform event times stay inside the 95% uniform-times band of the
/// temporal K at roughly 95% of lags.
pub fn check_uniform_time_calibration(trials: usize, seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(1.0, TimeResolution::Abstract).unwrap();
    let t_grid = TimeLagGrid::linspace(0.5, 8).unwrap();
    let coverages: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let spec = GeneratorSpec::StIndependent {
                n: 200,
                temporal: TemporalLaw::Uniform,
            };
            let p = generate(&spec, &window, Some(&tw), seed.wrapping_add(trial as u64 * 53))
                .unwrap()
                .into_st()
                .unwrap();
            let run = uniform_time_envelope(&p, &t_grid, 199, 0.95, seed ^ (trial as u64 * 59 + 1))
                .unwrap();
            let env = run.estimate.envelope.as_ref().unwrap();
            let inside = run
                .estimate
                .values
                .iter()
                .enumerate()
                .filter(|(i, v)| **v >= env.lower[*i] && **v <= env.upper[*i])
                .count();
            inside as f64 / t_grid.len() as f64
        })
        .collect();
    let mean_coverage = coverages.iter().sum::<f64>() / trials as f64;
    CheckOutcome::finish(
        "uniform-time-band-calibration",
        mean_coverage >= 0.90,
        format!("mean in-band fraction {mean_coverage:.3} over {trials} trials"),
        "uniform times stay inside the 95% band at >= 90% of lags on average".into(),
        started,
    )
}

/// Independent components give mean D near zero: |mean D| below 10% of
/// mean K0 on the mid-grid.
pub fn check_independent_d_near_zero(replicates: usize, seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(1.0, TimeResolution::Abstract).unwrap();
    let s_grid = DistanceGrid::linspace(0.10, 8).unwrap();
    let t_grid = TimeLagGrid::linspace(0.5, 8).unwrap();
    let cells = s_grid.len() * t_grid.len();
    let (d_sum, k0_sum) = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let spec = GeneratorSpec::StIndependent {
                n: 300,
                temporal: TemporalLaw::Uniform,
            };
            let p = generate(&spec, &window, Some(&tw), seed.wrapping_add(r as u64 * 61))
                .unwrap()
                .into_st()
                .unwrap();
            let k = k_hat_st(&p, &s_grid, &t_grid).unwrap();
            let k1 = k_hat_space(&p, &s_grid).unwrap();
            let k2 = k_hat_time(&p, &t_grid).unwrap();
            let (d, k0) = d_hat_st(&k, &k1, &k2).unwrap();
            (d.values().to_vec(), k0.values().to_vec())
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((vec![0.0; cells], vec![0.0; cells]), |(mut da, mut ka), (db, kb)| {
            for (x, y) in da.iter_mut().zip(&db) {
                *x += y;
            }
            for (x, y) in ka.iter_mut().zip(&kb) {
                *x += y;
            }
            (da, ka)
        });
    let mut worst_ratio = 0.0f64;
    for si in 2..8 {
        for ti in 2..8 {
            let idx = si * t_grid.len() + ti;
            let mean_d = (d_sum[idx] / replicates as f64).abs();
            let mean_k0 = k0_sum[idx] / replicates as f64;
            worst_ratio = worst_ratio.max(mean_d / mean_k0);
        }
    }
    CheckOutcome::finish(
        "independent-components-d-near-zero",
        worst_ratio < 0.1,
        format!("worst |mean D| / mean K0 = {worst_ratio:.4} over {replicates} replicates"),
        "|mean D| < 0.1 * mean K0 on the mid-grid under independence".into(),
        started,
    )
}

/// Standardized residuals under the null have per-cell mean near 0 and
/// variance near 1.
pub fn check_residual_null_moments(replicates: usize, seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(1.0, TimeResolution::Abstract).unwrap();
    let s_grid = DistanceGrid::linspace(0.25, 5).unwrap();
    let t_grid = TimeLagGrid::linspace(0.5, 5).unwrap();
    let cells = s_grid.len() * t_grid.len();
    let fields: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let spec = GeneratorSpec::StIndependent {
                n: 200,
                temporal: TemporalLaw::Uniform,
            };
            let p = generate(&spec, &window, Some(&tw), seed.wrapping_add(r as u64 * 67))
                .unwrap()
                .into_st()
                .unwrap();
            let k = k_hat_st(&p, &s_grid, &t_grid).unwrap();
            let k1 = k_hat_space(&p, &s_grid).unwrap();
            let k2 = k_hat_time(&p, &t_grid).unwrap();
            let (d, k0) = d_hat_st(&k, &k1, &k2).unwrap();
            let v = variance_grid(&p, &s_grid, &t_grid, 199, seed ^ (r as u64 * 71 + 1)).unwrap();
            let floor = crate::spacetime::default_variance_floor(&k0);
            let resid = residual_grid(&d, &v.variance, floor).unwrap();
            resid.values().to_vec()
        })
        .collect();
    let mut worst_mean = 0.0f64;
    let mut worst_var: f64 = 1.0;
    for c in 0..cells {
        let col: Vec<f64> = fields.iter().map(|f| f[c]).filter(|v| !v.is_nan()).collect();
        if col.len() < replicates / 2 {
            continue;
        }
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>()
            / (col.len() as f64 - 1.0);
        worst_mean = worst_mean.max(mean.abs());
        if (var - 1.0).abs() > (worst_var - 1.0).abs() {
            worst_var = var;
        }
    }
    let passed = worst_mean <= 0.15 && (0.7..=1.3).contains(&worst_var);
    CheckOutcome::finish(
        "residual-null-moments",
        passed,
        format!("worst per-cell |mean| = {worst_mean:.3}, extreme variance = {worst_var:.3}"),
        "null residuals: per-cell mean within +/-0.15, variance within [0.7, 1.3]".into(),
        started,
    )
}

/// The clustered generator exceeds the CSR reference at small distances.
pub fn check_thomas_clustering(seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let sigma = 0.03;
    let grid = DistanceGrid::new(vec![0.5 * sigma, sigma, 2.0 * sigma]).unwrap();
    let replicates = 50usize;
    let sums = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let spec = GeneratorSpec::ThomasCluster {
                parent_rate: 10.0,
                mean_offspring: 15.0,
                sigma,
                fixed_n: None,
            };
            let p = generate(&spec, &window, None, seed.wrapping_add(r as u64 * 73))
                .unwrap()
                .into_points()
                .unwrap();
            if p.len() < 2 {
                return vec![0.0; grid.len()];
            }
            k_hat(&p, &grid, Normalization::Unbiased).unwrap().values
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(vec![0.0; grid.len()], |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        });
    let mut min_ratio = f64::INFINITY;
    for (gi, &s) in grid.values().iter().enumerate() {
        let mean = sums[gi] / replicates as f64;
        min_ratio = min_ratio.min(mean / csr_k_reference(s));
    }
    CheckOutcome::finish(
        "thomas-cluster-excess",
        min_ratio > 2.0,
        format!("min mean-K / (pi s^2) = {min_ratio:.2} for s <= 2 sigma"),
        "clustered K exceeds the CSR reference by > 2x at s <= 2 sigma".into(),
        started,
    )
}

/// The normalized intensity surface integrates to n for an interior
/// pattern (quadrature tolerance 1e-3 relative).
pub fn check_intensity_mass(seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let h0 = 0.1;
    let margin = std::f64::consts::SQRT_2 * h0 + 0.01;
    let inner = StudyWindow::rectangle(margin, margin, 1.0 - margin, 1.0 - margin).unwrap();
    let mut rng = stream(seed, StreamDomain::Validation, 800);
    let pts: Vec<Point> = (0..60)
        .map(|_| crate::synth::uniform_point(&inner, &mut rng))
        .collect();
    let n = pts.len() as f64;
    let p = PointPattern::new(pts, window).unwrap();
    let surf = intensity_estimate(
        &p,
        h0,
        GridSpec { nx: 512, ny: 512 },
        IntensityVariant::Normalized,
    )
    .unwrap();
    let integral = surf.raster.integral();
    let rel = ((integral - n) / n).abs();
    CheckOutcome::finish(
        "intensity-normalized-mass",
        rel < 1e-3,
        format!("window integral {integral:.4} for n = {n}, relative error {rel:.2e}"),
        "normalized surface integrates to n within 1e-3 relative for interior patterns".into(),
        started,
    )
}

/// The p-value distribution of the interaction test does not depend on
/// event ordering (two-sample KS across orderings).
pub fn check_permutation_invariance(seed: u64) -> CheckOutcome {
    let started = std::time::Instant::now();
    let window = StudyWindow::unit_square();
    let tw = TimeWindow::new(1.0, TimeResolution::Abstract).unwrap();
    let s = DistanceGrid::linspace(0.25, 6).unwrap();
    let t = TimeLagGrid::linspace(0.5, 6).unwrap();
    let trials = 100usize;
    let p_values = |reverse: bool| -> Vec<f64> {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let spec = GeneratorSpec::StIndependent {
                    n: 60,
                    temporal: TemporalLaw::Uniform,
                };
                let st = generate(
                    &spec,
                    &window,
                    Some(&tw),
                    seed.wrapping_add(trial as u64 * 79 + u64::from(reverse)),
                )
                .unwrap()
                .into_st()
                .unwrap();
                let st = if reverse {
                    let mut pts = st.points().to_vec();
                    let mut times = st.times().to_vec();
                    pts.reverse();
                    times.reverse();
                    STPattern::new(
                        PointPattern::new(pts, st.window().clone()).unwrap(),
                        times,
                        *st.time_window(),
                    )
                    .unwrap()
                } else {
                    st
                };
                mc_interaction_test(&st, &s, &t, 99, 50, seed ^ (trial as u64 * 83))
                    .unwrap()
                    .p_value
            })
            .collect()
    };
    let a = p_values(false);
    let b = p_values(true);
    let (d_stat, p) = two_sample_ks(&a, &b);
    CheckOutcome::finish(
        "index-ordering-invariance",
        p > 0.01,
        format!("KS D = {d_stat:.3}, p = {p:.4} between orderings over {trials} trials each"),
        "p-value distribution invariant to event ordering (KS non-rejection at alpha = 0.01)"
            .into(),
        started,
    )
}
