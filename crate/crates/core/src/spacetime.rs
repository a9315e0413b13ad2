//! Spatio-temporal second-order inference.
//!
//! Estimators on an `(s, t)` grid:
//!
//! * `K(s,t) = |A| T / (n (n-1)) * sum_{j != i} w_ij v_ij I(d_ij < s) I(u_ij < t)`
//! * `K1(s)  = |A| / (n (n-1)) * sum w_ij I(d_ij < s)` (the spatial K)
//! * `K2(t)  = T / (n (n-1)) * sum v_ij I(u_ij < t)` (the temporal K)
//! * `D(s,t) = K(s,t) - K1(s) K2(t)`, zero in the origin limit
//! * `D0(s,t) = D(s,t) / [K1(s) K2(t)]`
//! * `R(s,t) = D(s,t) / sqrt(V(s,t))`, `U = sum_s sum_t R(s,t)`
//!
//! Under independent homogeneous components the benchmark is
//! `K(s,t) = 2 pi s^2 t`. The null variance grid `V(s,t)` and the null
//! distribution of `U` are both estimated by Monte Carlo over random
//! permutations of the event times with locations held fixed; `K1` and
//! `K2` are invariant under that permutation (the time multiset and the
//! per-pair lag multiset do not change), so the factorization benchmark
//! `K0 = K1 K2` is computed once and shared across replicates.

use rayon::prelude::*;

use rand::seq::SliceRandom;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::pairs::{first_bucket, weighted_pairs, PairSet};
use crate::patterns::STPattern;
use crate::rng::{stream, StreamDomain};
use crate::secondorder::{
    k_hat, DistanceGrid, EstimateMeta, FunctionEstimate, Normalization, TimeLagGrid,
};

/// A statistic sampled on the product of a distance grid and a time-lag
/// grid. `NaN` marks no-data cells.
#[derive(Debug, Clone, PartialEq)]
pub struct STGrid {
    s_grid: Vec<f64>,
    t_grid: Vec<f64>,
    /// Row-major with s major: `values[si * t_len + ti]`.
    values: Vec<f64>,
    /// Pairs whose spatial edge weight hit the proportion floor.
    pub clamped_weights: usize,
}

impl STGrid {
    pub fn new(s_grid: Vec<f64>, t_grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != s_grid.len() * t_grid.len() {
            return Err(Error::Config(format!(
                "matrix size {} does not match grid {}x{}",
                values.len(),
                s_grid.len(),
                t_grid.len()
            )));
        }
        Ok(STGrid {
            s_grid,
            t_grid,
            values,
            clamped_weights: 0,
        })
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s_grid
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, si: usize, ti: usize) -> f64 {
        self.values[si * self.t_grid.len() + ti]
    }

    pub fn same_grids(&self, other: &STGrid) -> bool {
        self.s_grid == other.s_grid && self.t_grid == other.t_grid
    }

    /// Count of no-data cells.
    pub fn no_data_cells(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }

    /// Mean over defined cells, 0 when none are defined.
    pub fn defined_mean(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for &v in &self.values {
            if !v.is_nan() {
                sum += v;
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    fn map_values(&self, values: Vec<f64>) -> STGrid {
        STGrid {
            s_grid: self.s_grid.clone(),
            t_grid: self.t_grid.clone(),
            values,
            clamped_weights: 0,
        }
    }
}

/// Precomputed state for repeated space-time K evaluation under time
/// permutations: the edge-weighted in-range pair table (locations fixed)
/// plus grid geometry.
struct StEngine {
    pairs: PairSet,
    s_len: usize,
    t_grid: Vec<f64>,
    t_len: usize,
    t_total: f64,
    norm: f64,
}

impl StEngine {
    fn build(pattern: &STPattern, s_grid: &DistanceGrid, t_grid: &TimeLagGrid) -> Result<Self> {
        let n = pattern.len();
        if n < 2 {
            return Err(Error::InsufficientData(format!(
                "space-time K needs n >= 2, got {n}"
            )));
        }
        let window = pattern.window();
        let pairs = weighted_pairs(pattern.points(), window, s_grid.values())?;
        Ok(StEngine {
            pairs,
            s_len: s_grid.len(),
            t_grid: t_grid.values().to_vec(),
            t_len: t_grid.len(),
            t_total: pattern.time_window().length(),
            norm: window.area() * pattern.time_window().length()
                / (n as f64 * (n as f64 - 1.0)),
        })
    }

    /// `K(s,t)` values for the given time assignment.
    fn k_values(&self, times: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.s_len * self.t_len];
        for p in &self.pairs.pairs {
            let ti = times[p.i as usize];
            let u = (ti - times[p.j as usize]).abs();
            let t_bucket = first_bucket(&self.t_grid, u);
            if t_bucket >= self.t_len {
                continue;
            }
            let v = if ti - u > 0.0 && ti + u < self.t_total {
                1.0
            } else {
                2.0
            };
            acc[p.s_bucket as usize * self.t_len + t_bucket] += p.weight * v;
        }
        // Double cumulative sum: first along t, then along s.
        for si in 0..self.s_len {
            let row = si * self.t_len;
            for ti in 1..self.t_len {
                acc[row + ti] += acc[row + ti - 1];
            }
        }
        for si in 1..self.s_len {
            for ti in 0..self.t_len {
                acc[si * self.t_len + ti] += acc[(si - 1) * self.t_len + ti];
            }
        }
        for v in &mut acc {
            *v *= self.norm;
        }
        acc
    }
}

/// Edge-corrected spatio-temporal K-function, non-decreasing in both
/// arguments.
pub fn k_hat_st(
    pattern: &STPattern,
    s_grid: &DistanceGrid,
    t_grid: &TimeLagGrid,
) -> Result<STGrid> {
    let engine = StEngine::build(pattern, s_grid, t_grid)?;
    let values = engine.k_values(pattern.times());
    let mut grid = STGrid::new(s_grid.values().to_vec(), t_grid.values().to_vec(), values)?;
    grid.clamped_weights = engine.pairs.clamped;
    Ok(grid)
}

/// Temporal K-function with the interval edge correction.
pub fn k_hat_time(pattern: &STPattern, t_grid: &TimeLagGrid) -> Result<FunctionEstimate> {
    let n = pattern.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "temporal K needs n >= 2, got {n}"
        )));
    }
    let values = temporal_k_values(pattern.times(), pattern.time_window().length(), t_grid);
    Ok(FunctionEstimate {
        grid: t_grid.values().to_vec(),
        values,
        envelope: None,
        // Expected value 2t under uniform event times.
        theoretical: Some(t_grid.values().iter().map(|&t| 2.0 * t).collect()),
        meta: EstimateMeta {
            estimator: "k-hat-time".into(),
            n_events: n,
            ..EstimateMeta::default()
        },
    })
}

fn temporal_k_values(times: &[f64], t_total: f64, t_grid: &TimeLagGrid) -> Vec<f64> {
    let n = times.len();
    let grid = t_grid.values();
    let mut buckets = vec![0.0; grid.len()];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let u = (times[i] - times[j]).abs();
            let bucket = first_bucket(grid, u);
            if bucket >= grid.len() {
                continue;
            }
            let v = if times[i] - u > 0.0 && times[i] + u < t_total {
                1.0
            } else {
                2.0
            };
            buckets[bucket] += v;
        }
    }
    let factor = t_total / (n as f64 * (n as f64 - 1.0));
    let mut acc = 0.0;
    buckets
        .iter()
        .map(|&b| {
            acc += b;
            acc * factor
        })
        .collect()
}

/// Monte Carlo band for the temporal K under i.i.d. uniform event times;
/// the replicate mean estimates the expected curve.
pub fn uniform_time_envelope(
    pattern: &STPattern,
    t_grid: &TimeLagGrid,
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<crate::secondorder::EnvelopeRun> {
    if replicates < 2 {
        return Err(Error::Config(format!(
            "uniform-time envelope needs at least 2 replicates, got {replicates}"
        )));
    }
    let n = pattern.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "uniform-time envelope needs n >= 2, got {n}"
        )));
    }
    let t_total = pattern.time_window().length();
    let observed = k_hat_time(pattern, t_grid)?;

    let reps: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, StreamDomain::Envelope, r as u64);
            let times: Vec<f64> = (0..n)
                .map(|_| rand::Rng::random::<f64>(&mut rng) * t_total)
                .collect();
            temporal_k_values(&times, t_total, t_grid)
        })
        .collect();

    crate::secondorder::envelope_run_from_replicates(
        "k-time-uniform",
        observed,
        reps,
        replicates,
        level,
        seed,
    )
}

/// Spatial K of a space-time pattern; same code path as the purely
/// spatial estimator, so both agree bit for bit.
pub fn k_hat_space(pattern: &STPattern, s_grid: &DistanceGrid) -> Result<FunctionEstimate> {
    k_hat(pattern.base(), s_grid, Normalization::Unbiased)
}

/// `D(s,t) = K(s,t) - K1(s) K2(t)`; also returns the factorization
/// benchmark `K0(s,t) = K1(s) K2(t)`.
pub fn d_hat_st(
    k_st: &STGrid,
    k1: &FunctionEstimate,
    k2: &FunctionEstimate,
) -> Result<(STGrid, STGrid)> {
    if k_st.s_values() != k1.grid.as_slice() || k_st.t_values() != k2.grid.as_slice() {
        return Err(Error::Config(
            "space-time grid does not match component function grids".into(),
        ));
    }
    let t_len = k_st.t_values().len();
    let mut d = vec![0.0; k_st.values().len()];
    let mut k0 = vec![0.0; k_st.values().len()];
    for (si, &k1v) in k1.values.iter().enumerate() {
        for (ti, &k2v) in k2.values.iter().enumerate() {
            let idx = si * t_len + ti;
            k0[idx] = k1v * k2v;
            d[idx] = k_st.values()[idx] - k0[idx];
        }
    }
    Ok((k_st.map_values(d), k_st.map_values(k0)))
}

/// `D0(s,t) = D(s,t) / K0(s,t)`; cells with `K0 = 0` are no-data.
pub fn d0_hat_st(d: &STGrid, k0: &STGrid) -> Result<STGrid> {
    if !d.same_grids(k0) {
        return Err(Error::Config("D and K0 grids do not match".into()));
    }
    let values = d
        .values()
        .iter()
        .zip(k0.values())
        .map(|(&dv, &kv)| {
            if kv == 0.0 || kv.is_nan() || dv.is_nan() {
                f64::NAN
            } else {
                dv / kv
            }
        })
        .collect();
    Ok(d.map_values(values))
}

/// Null variance and standard-error grids.
#[derive(Debug, Clone)]
pub struct VarianceGrids {
    /// Sample variance of `D(s,t)` across time-permuted replicates.
    pub variance: STGrid,
    /// Pointwise `sqrt(V)`.
    pub standard_error: STGrid,
}

/// Estimate `V(s,t)` as the sample variance of `D(s,t)` over `permutations`
/// random time permutations with locations fixed.
pub fn variance_grid(
    pattern: &STPattern,
    s_grid: &DistanceGrid,
    t_grid: &TimeLagGrid,
    permutations: usize,
    seed: u64,
) -> Result<VarianceGrids> {
    if permutations < 2 {
        return Err(Error::Config(format!(
            "variance grid needs at least 2 permutations, got {permutations}"
        )));
    }
    let engine = StEngine::build(pattern, s_grid, t_grid)?;
    let k0 = factorization_values(pattern, s_grid, t_grid)?;
    let replicates = permuted_d_replicates(&engine, pattern, &k0, permutations, seed, StreamDomain::VarianceBatch);
    let variance = sample_variance(&replicates);
    let se = variance.iter().map(|&v| v.sqrt()).collect();
    let v_grid = STGrid::new(s_grid.values().to_vec(), t_grid.values().to_vec(), variance)?;
    let se_grid = v_grid.map_values(se);
    Ok(VarianceGrids {
        variance: v_grid,
        standard_error: se_grid,
    })
}

fn factorization_values(
    pattern: &STPattern,
    s_grid: &DistanceGrid,
    t_grid: &TimeLagGrid,
) -> Result<Vec<f64>> {
    let k1 = k_hat_space(pattern, s_grid)?;
    let k2 = k_hat_time(pattern, t_grid)?;
    let t_len = t_grid.len();
    let mut k0 = vec![0.0; s_grid.len() * t_len];
    for (si, &a) in k1.values.iter().enumerate() {
        for (ti, &b) in k2.values.iter().enumerate() {
            k0[si * t_len + ti] = a * b;
        }
    }
    Ok(k0)
}

fn permuted_d_replicates(
    engine: &StEngine,
    pattern: &STPattern,
    k0: &[f64],
    count: usize,
    seed: u64,
    domain: StreamDomain,
) -> Vec<Vec<f64>> {
    (0..count)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, domain, r as u64);
            let mut times = pattern.times().to_vec();
            times.shuffle(&mut rng);
            let mut k = engine.k_values(&times);
            for (kv, &k0v) in k.iter_mut().zip(k0) {
                *kv -= k0v;
            }
            k
        })
        .collect()
}

fn sample_variance(replicates: &[Vec<f64>]) -> Vec<f64> {
    let m = replicates.len();
    let len = replicates[0].len();
    let mut mean = vec![0.0; len];
    for rep in replicates {
        for (acc, &v) in mean.iter_mut().zip(rep) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= m as f64;
    }
    let mut var = vec![0.0; len];
    for rep in replicates {
        for ((acc, &v), &mu) in var.iter_mut().zip(rep).zip(&mean) {
            *acc += (v - mu) * (v - mu);
        }
    }
    for v in &mut var {
        *v /= (m - 1) as f64;
    }
    var
}

/// Default variance floor: `1e-12 * (mean K0)^2`. Cells below it are
/// excluded from residuals and from `U`, with an audit count.
pub fn default_variance_floor(k0: &STGrid) -> f64 {
    let mean = k0.defined_mean();
    1e-12 * mean * mean
}

/// Standardized residuals `R = D / sqrt(V)`; cells with `V` below the
/// floor (or zero) are no-data.
pub fn residual_grid(d: &STGrid, v: &STGrid, floor: f64) -> Result<STGrid> {
    if !d.same_grids(v) {
        return Err(Error::Config("D and V grids do not match".into()));
    }
    let values = d
        .values()
        .iter()
        .zip(v.values())
        .map(|(&dv, &vv)| {
            if vv.is_nan() || vv < floor || vv <= 0.0 || dv.is_nan() {
                f64::NAN
            } else {
                dv / vv.sqrt()
            }
        })
        .collect();
    Ok(d.map_values(values))
}

/// Grid sum of the defined residual cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UStatistic {
    pub value: f64,
    pub included_cells: usize,
    pub excluded_cells: usize,
}

pub fn u_statistic(r: &STGrid) -> Result<UStatistic> {
    let mut value = 0.0;
    let mut included = 0usize;
    let mut excluded = 0usize;
    for &v in r.values() {
        if v.is_nan() {
            excluded += 1;
        } else {
            value += v;
            included += 1;
        }
    }
    if included == 0 {
        return Err(Error::DegenerateStatistic(
            "all residual cells are excluded".into(),
        ));
    }
    Ok(UStatistic {
        value,
        included_cells: included,
        excluded_cells: excluded,
    })
}

/// Sign of the detected interaction. The Monte Carlo test ranks for
/// positive interaction (upper tail); the direction reports where the
/// observed statistic sits relative to the null replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    Positive,
    Negative,
}

impl Interaction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Interaction::Positive => "positive",
            Interaction::Negative => "negative",
        }
    }
}

/// Outcome of the Monte Carlo space-time interaction test.
#[derive(Debug, Clone)]
pub struct MCTestResult {
    /// Observed statistic `u1`.
    pub u_observed: f64,
    /// Null replicates `u2..um` (length `m - 1`).
    pub replicates: Vec<f64>,
    pub m: usize,
    /// Upper-tail rank of `u1` among all `m` values; ties rank worst.
    pub rank: usize,
    /// One-sided attained level `rank / m`.
    pub p_value: f64,
    pub direction: Interaction,
    pub seed: u64,
    /// Residual cells excluded by the variance floor.
    pub excluded_cells: usize,
    pub elapsed: std::time::Duration,
}

/// Outcome of the Gaussian approximation to the interaction test.
#[derive(Debug, Clone)]
pub struct GaussianTestResult {
    pub z: f64,
    pub p_two_sided: f64,
    /// Always true: the reference distribution is an approximation.
    pub approximate: bool,
    pub seed: u64,
}

/// Monte Carlo test for space-time interaction.
///
/// The variance grid is estimated once from `variance_permutations` time
/// permutations and held fixed; the observed `U` is then ranked among
/// `m - 1` replicate `U` values from fresh permutations. `p = k/m` with
/// ties counted against significance. Deterministic given the seed.
pub fn mc_interaction_test(
    pattern: &STPattern,
    s_grid: &DistanceGrid,
    t_grid: &TimeLagGrid,
    m: usize,
    variance_permutations: usize,
    seed: u64,
) -> Result<MCTestResult> {
    let (mc, _) = interaction_tests(pattern, s_grid, t_grid, m, variance_permutations, seed)?;
    Ok(mc)
}

/// Gaussian approximation: `z = u1 / sqrt(Var(U))` with the null variance
/// estimated from the same permutation replicates, referred to N(0, 1).
pub fn gaussian_interaction_test(
    pattern: &STPattern,
    s_grid: &DistanceGrid,
    t_grid: &TimeLagGrid,
    m: usize,
    variance_permutations: usize,
    seed: u64,
) -> Result<GaussianTestResult> {
    let (_, gauss) = interaction_tests(pattern, s_grid, t_grid, m, variance_permutations, seed)?;
    Ok(gauss)
}

/// Run both interaction tests from one set of permutation replicates.
pub fn interaction_tests(
    pattern: &STPattern,
    s_grid: &DistanceGrid,
    t_grid: &TimeLagGrid,
    m: usize,
    variance_permutations: usize,
    seed: u64,
) -> Result<(MCTestResult, GaussianTestResult)> {
    let started = std::time::Instant::now();
    if m < 20 {
        return Err(Error::Config(format!(
            "Monte Carlo test needs m >= 20, got {m}"
        )));
    }
    if variance_permutations < 2 {
        return Err(Error::Config(format!(
            "variance estimation needs at least 2 permutations, got {variance_permutations}"
        )));
    }
    if pattern.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "interaction test needs n >= 3, got {}",
            pattern.len()
        )));
    }

    let engine = StEngine::build(pattern, s_grid, t_grid)?;
    let k0 = factorization_values(pattern, s_grid, t_grid)?;

    // Frozen variance grid from the initial permutation batch.
    let var_reps = permuted_d_replicates(
        &engine,
        pattern,
        &k0,
        variance_permutations,
        seed,
        StreamDomain::VarianceBatch,
    );
    let variance = sample_variance(&var_reps);
    let k0_grid = STGrid::new(s_grid.values().to_vec(), t_grid.values().to_vec(), k0.clone())?;
    let floor = default_variance_floor(&k0_grid);

    let u_of = |d_values: &[f64]| -> (f64, usize, usize) {
        let mut value = 0.0;
        let mut included = 0usize;
        let mut excluded = 0usize;
        for (&dv, &vv) in d_values.iter().zip(&variance) {
            if vv < floor || vv <= 0.0 {
                excluded += 1;
            } else {
                value += dv / vv.sqrt();
                included += 1;
            }
        }
        (value, included, excluded)
    };

    let observed_k = engine.k_values(pattern.times());
    let observed_d: Vec<f64> = observed_k.iter().zip(&k0).map(|(a, b)| a - b).collect();
    let (u1, included, excluded) = u_of(&observed_d);
    if included == 0 {
        return Err(Error::DegenerateStatistic(
            "all residual cells are excluded by the variance floor".into(),
        ));
    }

    let test_reps = permuted_d_replicates(
        &engine,
        pattern,
        &k0,
        m - 1,
        seed,
        StreamDomain::TestReplicate,
    );
    let u_reps: Vec<f64> = test_reps.iter().map(|d| u_of(d).0).collect();

    // Upper-tail rank; ties count against significance.
    let rank = 1 + u_reps.iter().filter(|&&u| u >= u1).count();
    let p_value = rank as f64 / m as f64;

    let rep_mean = u_reps.iter().sum::<f64>() / u_reps.len() as f64;
    let median = {
        let mut sorted = u_reps.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite U"));
        sorted[sorted.len() / 2]
    };
    let direction = if u1 >= median {
        Interaction::Positive
    } else {
        Interaction::Negative
    };

    let rep_var = u_reps
        .iter()
        .map(|&u| (u - rep_mean) * (u - rep_mean))
        .sum::<f64>()
        / (u_reps.len() as f64 - 1.0);
    if rep_var <= 0.0 || !rep_var.is_finite() {
        return Err(Error::DegenerateStatistic(
            "null variance of U is zero".into(),
        ));
    }
    let z = u1 / rep_var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p_two_sided = 2.0 * (1.0 - normal.cdf(z.abs()));

    Ok((
        MCTestResult {
            u_observed: u1,
            replicates: u_reps,
            m,
            rank,
            p_value,
            direction,
            seed,
            excluded_cells: excluded,
            elapsed: started.elapsed(),
        },
        GaussianTestResult {
            z,
            p_two_sided,
            approximate: true,
            seed,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, StudyWindow, TimeResolution, TimeWindow};
    use crate::patterns::PointPattern;
    use approx::assert_relative_eq;

    fn two_event_pattern() -> STPattern {
        // d = 0.3, u = 2, T = 10, both lag intervals interior, circles interior.
        let base = PointPattern::new(
            vec![Point::new(0.35, 0.5), Point::new(0.65, 0.5)],
            StudyWindow::unit_square(),
        )
        .unwrap();
        let tw = TimeWindow::new(10.0, TimeResolution::Abstract).unwrap();
        STPattern::new(base, vec![4.0, 6.0], tw).unwrap()
    }

    #[test]
    fn two_event_k_st_hand_value() {
        let p = two_event_pattern();
        let s = DistanceGrid::new(vec![0.5]).unwrap();
        let t = TimeLagGrid::new(vec![3.0]).unwrap();
        let k = k_hat_st(&p, &s, &t).unwrap();
        // |A| T / (n(n-1)) * (1 + 1) = 10/2 * 2 = 10.
        assert_relative_eq!(k.get(0, 0), 10.0, max_relative = 1e-12);
    }

    #[test]
    fn two_event_k_st_zero_below_lag() {
        let p = two_event_pattern();
        let s = DistanceGrid::new(vec![0.5]).unwrap();
        let t = TimeLagGrid::new(vec![1.0]).unwrap();
        let k = k_hat_st(&p, &s, &t).unwrap();
        assert_eq!(k.get(0, 0), 0.0);
    }

    #[test]
    fn two_event_temporal_k_hand_value() {
        let p = two_event_pattern();
        let t = TimeLagGrid::new(vec![3.0]).unwrap();
        let k2 = k_hat_time(&p, &t).unwrap();
        // T / (n(n-1)) * (1 + 1) = 10/2 * 2 = 10.
        assert_relative_eq!(k2.values[0], 10.0, max_relative = 1e-12);
    }

    #[test]
    fn temporal_k_zero_below_all_lags() {
        let p = two_event_pattern();
        let t = TimeLagGrid::new(vec![0.5, 1.0]).unwrap();
        let k2 = k_hat_time(&p, &t).unwrap();
        assert_eq!(k2.values, vec![0.0, 0.0]);
    }

    #[test]
    fn two_event_d_is_exactly_zero() {
        let p = two_event_pattern();
        let s = DistanceGrid::new(vec![0.5]).unwrap();
        let t = TimeLagGrid::new(vec![3.0]).unwrap();
        let k = k_hat_st(&p, &s, &t).unwrap();
        let k1 = k_hat_space(&p, &s).unwrap();
        let k2 = k_hat_time(&p, &t).unwrap();
        let (d, k0) = d_hat_st(&k, &k1, &k2).unwrap();
        // K = 10, K1 = 1, K2 = 10: D = 10 - 10 = 0 exactly.
        assert_eq!(d.get(0, 0), 0.0);
        assert_relative_eq!(k0.get(0, 0), 10.0, max_relative = 1e-12);
    }

    #[test]
    fn k_st_monotone_in_both_arguments() {
        let p = test_pattern(60, 11);
        let s = DistanceGrid::linspace(0.3, 6).unwrap();
        let t = TimeLagGrid::linspace(4.0, 5).unwrap();
        let k = k_hat_st(&p, &s, &t).unwrap();
        for si in 0..6 {
            for ti in 1..5 {
                assert!(k.get(si, ti) >= k.get(si, ti - 1));
            }
        }
        for ti in 0..5 {
            for si in 1..6 {
                assert!(k.get(si, ti) >= k.get(si - 1, ti));
            }
        }
    }

    fn test_pattern(n: usize, seed: u64) -> STPattern {
        let tw = TimeWindow::new(10.0, TimeResolution::Abstract).unwrap();
        let spec = crate::synth::GeneratorSpec::StIndependent {
            n,
            temporal: crate::synth::TemporalLaw::Uniform,
        };
        crate::synth::generate(&spec, &StudyWindow::unit_square(), Some(&tw), seed)
            .unwrap()
            .into_st()
            .unwrap()
    }

    #[test]
    fn saturated_time_indicator_scales_spatial_k() {
        // All times in a tight interior band: every v = 1 and every lag is
        // below the smallest grid lag, so K(s, t) = T * K1(s).
        let base = PointPattern::new(
            (0..20)
                .map(|i| {
                    let a = i as f64 * 0.53;
                    Point::new(a.fract(), (a * 0.77).fract())
                })
                .collect(),
            StudyWindow::unit_square(),
        )
        .unwrap();
        let tw = TimeWindow::new(10.0, TimeResolution::Abstract).unwrap();
        let times: Vec<f64> = (0..20).map(|i| 5.0 + 1e-6 * i as f64).collect();
        let p = STPattern::new(base, times, tw).unwrap();
        let s = DistanceGrid::linspace(0.25, 5).unwrap();
        let t = TimeLagGrid::new(vec![1.0, 2.0]).unwrap();
        let k = k_hat_st(&p, &s, &t).unwrap();
        let k1 = k_hat_space(&p, &s).unwrap();
        for si in 0..5 {
            if k1.values[si] > 0.0 {
                assert_relative_eq!(k.get(si, 0) / k1.values[si], 10.0, max_relative = 1e-12);
                assert_relative_eq!(k.get(si, 1) / k1.values[si], 10.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn k_space_is_bit_identical_to_spatial_k() {
        let p = test_pattern(50, 6);
        let s = DistanceGrid::linspace(0.3, 8).unwrap();
        let from_st = k_hat_space(&p, &s).unwrap();
        let direct = k_hat(p.base(), &s, Normalization::Unbiased).unwrap();
        assert_eq!(from_st.values, direct.values);
    }

    #[test]
    fn d0_ratio_cases() {
        let s = vec![1.0, 2.0];
        let t = vec![1.0];
        let d = STGrid::new(s.clone(), t.clone(), vec![0.0, 3.0]).unwrap();
        let k0 = STGrid::new(s, t, vec![2.0, 0.0]).unwrap();
        let d0 = d0_hat_st(&d, &k0).unwrap();
        assert_eq!(d0.get(0, 0), 0.0);
        assert!(d0.get(1, 0).is_nan());

        let d0_id = d0_hat_st(&k0, &k0).unwrap();
        assert_eq!(d0_id.get(0, 0), 1.0);
    }

    #[test]
    fn variance_zero_for_constant_times() {
        let base = PointPattern::new(
            (0..8)
                .map(|i| Point::new(0.1 + 0.1 * i as f64, 0.5))
                .collect(),
            StudyWindow::unit_square(),
        )
        .unwrap();
        let tw = TimeWindow::new(10.0, TimeResolution::Abstract).unwrap();
        let p = STPattern::new(base, vec![5.0; 8], tw).unwrap();
        let s = DistanceGrid::linspace(0.3, 4).unwrap();
        let t = TimeLagGrid::linspace(4.0, 3).unwrap();
        let v = variance_grid(&p, &s, &t, 16, 5).unwrap();
        assert!(v.variance.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn variance_grid_deterministic() {
        let p = test_pattern(40, 3);
        let s = DistanceGrid::linspace(0.3, 4).unwrap();
        let t = TimeLagGrid::linspace(4.0, 4).unwrap();
        let a = variance_grid(&p, &s, &t, 20, 11).unwrap();
        let b = variance_grid(&p, &s, &t, 20, 11).unwrap();
        assert_eq!(a.variance.values(), b.variance.values());
    }

    #[test]
    fn variance_zero_at_pairless_origin_cell() {
        let p = test_pattern(30, 21);
        // First s value below any pairwise distance: no pair ever counts
        // there, in any permutation.
        let s = DistanceGrid::new(vec![1e-9, 0.3]).unwrap();
        let t = TimeLagGrid::new(vec![1e-9, 4.0]).unwrap();
        let v = variance_grid(&p, &s, &t, 25, 2).unwrap();
        assert_eq!(v.variance.get(0, 0), 0.0);
    }

    #[test]
    fn residual_and_u_statistic_rules() {
        let s = vec![1.0, 2.0];
        let t = vec![1.0, 2.0];
        let d = STGrid::new(s.clone(), t.clone(), vec![0.0, 2.0, 3.0, 4.0]).unwrap();
        let v = STGrid::new(s, t, vec![1.0, 4.0, 1.0, 1e-20]).unwrap();
        let r = residual_grid(&d, &v, 1e-12).unwrap();
        assert_eq!(r.get(0, 0), 0.0);
        assert_eq!(r.get(0, 1), 1.0);
        assert_eq!(r.get(1, 0), 3.0);
        assert!(r.get(1, 1).is_nan());

        let u = u_statistic(&r).unwrap();
        assert_eq!(u.value, 4.0);
        assert_eq!(u.excluded_cells, 1);
        assert_eq!(u.included_cells, 3);
    }

    #[test]
    fn u_statistic_simple_sum() {
        let r = STGrid::new(vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(u_statistic(&r).unwrap().value, 10.0);
        let all_nan = STGrid::new(vec![1.0], vec![1.0], vec![f64::NAN]).unwrap();
        assert!(matches!(
            u_statistic(&all_nan),
            Err(Error::DegenerateStatistic(_))
        ));
    }

    #[test]
    fn rank_and_p_value_mechanics() {
        // Observed largest of m = 1000: p must be exactly 0.001.
        let p = test_pattern(30, 2);
        let s = DistanceGrid::linspace(0.3, 3).unwrap();
        let t = TimeLagGrid::linspace(4.0, 3).unwrap();
        let (mc, _) = interaction_tests(&p, &s, &t, 50, 20, 17).unwrap();
        assert_eq!(mc.replicates.len(), 49);
        assert!(mc.rank >= 1 && mc.rank <= mc.m);
        assert_relative_eq!(mc.p_value, mc.rank as f64 / 50.0);
    }

    #[test]
    fn mc_test_deterministic_given_seed() {
        let p = test_pattern(40, 8);
        let s = DistanceGrid::linspace(0.3, 4).unwrap();
        let t = TimeLagGrid::linspace(4.0, 4).unwrap();
        let (a, ga) = interaction_tests(&p, &s, &t, 99, 20, 31).unwrap();
        let (b, gb) = interaction_tests(&p, &s, &t, 99, 20, 31).unwrap();
        assert_eq!(a.u_observed, b.u_observed);
        assert_eq!(a.replicates, b.replicates);
        assert_eq!(a.p_value, b.p_value);
        assert_eq!(ga.z, gb.z);
    }

    #[test]
    fn constant_times_degenerate_statistic() {
        let base = PointPattern::new(
            (0..10)
                .map(|i| Point::new(0.05 + 0.09 * i as f64, 0.4))
                .collect(),
            StudyWindow::unit_square(),
        )
        .unwrap();
        let tw = TimeWindow::new(10.0, TimeResolution::Abstract).unwrap();
        let p = STPattern::new(base, vec![5.0; 10], tw).unwrap();
        let s = DistanceGrid::linspace(0.3, 3).unwrap();
        let t = TimeLagGrid::linspace(4.0, 3).unwrap();
        assert!(matches!(
            interaction_tests(&p, &s, &t, 40, 10, 0),
            Err(Error::DegenerateStatistic(_))
        ));
    }

    #[test]
    fn estimator_preconditions() {
        let tw = TimeWindow::new(10.0, TimeResolution::Abstract).unwrap();
        let lone = STPattern::new(
            PointPattern::new(vec![Point::new(0.5, 0.5)], StudyWindow::unit_square()).unwrap(),
            vec![1.0],
            tw,
        )
        .unwrap();
        let s = DistanceGrid::new(vec![0.2]).unwrap();
        let t = TimeLagGrid::new(vec![1.0]).unwrap();
        assert!(matches!(
            k_hat_st(&lone, &s, &t),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            k_hat_time(&lone, &t),
            Err(Error::InsufficientData(_))
        ));

        let p = test_pattern(10, 1);
        assert!(matches!(
            variance_grid(&p, &s, &t, 1, 0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            interaction_tests(&p, &s, &t, 19, 10, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn grid_mismatch_is_config_error() {
        let p = two_event_pattern();
        let s = DistanceGrid::new(vec![0.5]).unwrap();
        let t = TimeLagGrid::new(vec![3.0]).unwrap();
        let k = k_hat_st(&p, &s, &t).unwrap();
        let k1 = k_hat_space(&p, &DistanceGrid::new(vec![0.4]).unwrap()).unwrap();
        let k2 = k_hat_time(&p, &t).unwrap();
        assert!(matches!(d_hat_st(&k, &k1, &k2), Err(Error::Config(_))));
    }
}
