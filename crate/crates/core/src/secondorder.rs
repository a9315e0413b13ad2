//! Purely spatial second-order inference: Ripley's K and L functions,
//! Diggle's D-function, and Monte Carlo envelopes under complete spatial
//! randomness (CSR) and random labeling (RL).
//!
//! Estimator conventions:
//!
//! * `Unbiased` normalization: `K(s) = |A| / (n (n-1)) * sum_{j != i} w_ij I(d_ij < s)`,
//!   with `w_ij` the isotropic edge weight of the circle centred at event
//!   `i` with radius `d_ij`.
//! * `NSquared` normalization: the classical density-plugin form
//!   `|A| / n^2 * sum w_ij I(d_ij < s)`.
//! * Indicators are strict: a pair at exactly distance `s` does not count.
//! * The CSR reference curve is `pi s^2`; `L(s) - s = 0` under CSR.
//!
//! Envelope replicates draw from per-replicate seed substreams, so results
//! do not depend on evaluation order or thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::csr_k_reference;
use crate::pairs::{weighted_pairs, PairSet};
use crate::patterns::{Mark, MarkedPattern, PointPattern};
use crate::rng::{stream, StreamDomain};
use crate::synth;

/// Strictly increasing positive distances at which a statistic is sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceGrid(Vec<f64>);

/// Default `s_max` as a fraction of the window diameter.
pub const DEFAULT_S_MAX_FRACTION: f64 = 0.25;

impl DistanceGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("distance grid is empty".into()));
        }
        let mut prev = 0.0;
        for &v in &values {
            if !v.is_finite() || v <= prev {
                return Err(Error::Config(
                    "distance grid must be strictly increasing and positive".into(),
                ));
            }
            prev = v;
        }
        Ok(DistanceGrid(values))
    }

    /// `count` equally spaced values over `(0, s_max]`.
    pub fn linspace(s_max: f64, count: usize) -> Result<Self> {
        if s_max.is_nan() || s_max <= 0.0 || count == 0 {
            return Err(Error::Config(format!(
                "invalid distance grid spec: s_max={s_max}, count={count}"
            )));
        }
        DistanceGrid::new(
            (1..=count)
                .map(|k| s_max * k as f64 / count as f64)
                .collect(),
        )
    }

    /// Ten equally spaced distances up to a quarter of the window diameter.
    pub fn default_for_window(window: &crate::geometry::StudyWindow) -> Self {
        DistanceGrid::linspace(DEFAULT_S_MAX_FRACTION * window.diameter(), 10)
            .expect("diameter is positive")
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn s_max(&self) -> f64 {
        *self.0.last().expect("non-empty grid")
    }
}

/// Strictly increasing positive time lags.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeLagGrid(Vec<f64>);

impl TimeLagGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let inner = DistanceGrid::new(values)
            .map_err(|_| Error::Config("time-lag grid must be strictly increasing and positive".into()))?;
        Ok(TimeLagGrid(inner.0))
    }

    /// `count` equally spaced lags over `(0, t_max]`.
    pub fn linspace(t_max: f64, count: usize) -> Result<Self> {
        let inner = DistanceGrid::linspace(t_max, count)?;
        Ok(TimeLagGrid(inner.0))
    }

    /// Ten equally spaced lags up to half the time-window length.
    pub fn default_for_window(tw: &crate::geometry::TimeWindow) -> Self {
        TimeLagGrid::linspace(0.5 * tw.length(), 10).expect("window length is positive")
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.0.last().expect("non-empty grid")
    }
}

/// Normalization of the K estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `|A| / (n (n-1))` pair normalization (approximately unbiased).
    Unbiased,
    /// `|A| / n^2` density-plugin normalization.
    NSquared,
}

impl Normalization {
    pub(crate) fn factor(&self, area: f64, n: usize) -> f64 {
        match self {
            Normalization::Unbiased => area / (n as f64 * (n as f64 - 1.0)),
            Normalization::NSquared => area / (n as f64 * n as f64),
        }
    }
}

/// Pointwise envelope band.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Estimator metadata carried with every function estimate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimateMeta {
    pub estimator: String,
    pub n_events: usize,
    pub normalization: Option<Normalization>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    /// Pairs whose edge weight hit the proportion floor.
    pub clamped_weights: usize,
    pub warnings: Vec<String>,
}

/// A 1-D statistic sampled on a distance (or time-lag) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub envelope: Option<Envelope>,
    pub theoretical: Option<Vec<f64>>,
    pub meta: EstimateMeta,
}

impl FunctionEstimate {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.values.len() != self.grid.len() {
            return Err(Error::Config("estimate length does not match grid".into()));
        }
        if let Some(env) = &self.envelope {
            if env.lower.len() != self.grid.len() || env.upper.len() != self.grid.len() {
                return Err(Error::Config("envelope length does not match grid".into()));
            }
            if env.lower.iter().zip(&env.upper).any(|(l, u)| l > u) {
                return Err(Error::Config("envelope lower exceeds upper".into()));
            }
        }
        Ok(())
    }
}

/// Cumulative bucket sums scaled to a K estimate.
fn k_from_buckets(bucket_sums: &[f64], factor: f64) -> Vec<f64> {
    let mut acc = 0.0;
    bucket_sums
        .iter()
        .map(|&b| {
            acc += b;
            acc * factor
        })
        .collect()
}

pub(crate) fn k_values_from_pairs(
    pairs: &PairSet,
    grid_len: usize,
    factor: f64,
) -> Vec<f64> {
    let mut buckets = vec![0.0; grid_len];
    for p in &pairs.pairs {
        buckets[p.s_bucket as usize] += p.weight;
    }
    k_from_buckets(&buckets, factor)
}

/// Ripley's K-function with isotropic edge correction.
pub fn k_hat(
    pattern: &PointPattern,
    grid: &DistanceGrid,
    normalization: Normalization,
) -> Result<FunctionEstimate> {
    let n = pattern.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "K estimation needs n >= 2, got {n}"
        )));
    }
    let window = pattern.window();
    let pairs = weighted_pairs(pattern.points(), window, grid.values())?;
    let factor = normalization.factor(window.area(), n);
    let values = k_values_from_pairs(&pairs, grid.len(), factor);

    let mut warnings = Vec::new();
    let recommended = DEFAULT_S_MAX_FRACTION * window.diameter();
    if grid.s_max() > recommended {
        warnings.push(format!(
            "s_max {} exceeds {} (quarter of window diameter); estimates at large s are unstable",
            grid.s_max(),
            recommended
        ));
    }

    Ok(FunctionEstimate {
        grid: grid.values().to_vec(),
        values,
        envelope: None,
        theoretical: Some(grid.values().iter().map(|&s| csr_k_reference(s)).collect()),
        meta: EstimateMeta {
            estimator: "k-hat".into(),
            n_events: n,
            normalization: Some(normalization),
            clamped_weights: pairs.clamped,
            warnings,
            ..EstimateMeta::default()
        },
    })
}

/// Variance-stabilized transform `L(s) - s` with `L(s) = sqrt(K(s)/pi)`.
/// The zero curve is the CSR reference. Envelope and theoretical curves
/// are transformed pointwise (the transform is monotone).
pub fn l_hat(k: &FunctionEstimate) -> Result<FunctionEstimate> {
    if k.values.iter().any(|&v| v < 0.0) {
        return Err(Error::Domain(
            "L transform needs non-negative K values".into(),
        ));
    }
    let transform = |vals: &[f64]| -> Vec<f64> {
        vals.iter()
            .zip(&k.grid)
            .map(|(&v, &s)| (v / std::f64::consts::PI).sqrt() - s)
            .collect()
    };
    let envelope = match &k.envelope {
        Some(env) => {
            if env.lower.iter().any(|&v| v < 0.0) {
                return Err(Error::Domain(
                    "L transform needs non-negative envelope bounds".into(),
                ));
            }
            Some(Envelope {
                lower: transform(&env.lower),
                upper: transform(&env.upper),
            })
        }
        None => None,
    };
    Ok(FunctionEstimate {
        grid: k.grid.clone(),
        values: transform(&k.values),
        envelope,
        theoretical: Some(vec![0.0; k.grid.len()]),
        meta: EstimateMeta {
            estimator: "l-hat-minus-s".into(),
            ..k.meta.clone()
        },
    })
}

/// Diggle's D-function: `K_case(s) - K_control(s)` on a shared grid and
/// normalization. Identically zero when the two classes are the same
/// point multiset.
pub fn d_hat(
    marked: &MarkedPattern,
    grid: &DistanceGrid,
    normalization: Normalization,
) -> Result<FunctionEstimate> {
    let n_case = marked.count(Mark::Case);
    let n_control = marked.len() - n_case;
    if n_case < 2 || n_control < 2 {
        return Err(Error::InsufficientData(format!(
            "D estimation needs >= 2 events per class, got {n_case} cases / {n_control} controls"
        )));
    }
    let window = marked.base().window();
    let pairs = weighted_pairs(marked.base().points(), window, grid.values())?;
    let (k11, k22) = class_k_pair(&pairs, marked.marks(), grid.len(), window.area(), normalization);
    let values: Vec<f64> = k11.iter().zip(&k22).map(|(a, b)| a - b).collect();
    Ok(FunctionEstimate {
        grid: grid.values().to_vec(),
        values,
        envelope: None,
        theoretical: Some(vec![0.0; grid.len()]),
        meta: EstimateMeta {
            estimator: "d-hat".into(),
            n_events: marked.len(),
            normalization: Some(normalization),
            clamped_weights: pairs.clamped,
            ..EstimateMeta::default()
        },
    })
}

/// Per-class K curves from a shared pair table. Only pairs whose both
/// endpoints carry the class mark contribute; the locations (and hence the
/// edge weights) do not depend on the labeling.
fn class_k_pair(
    pairs: &PairSet,
    marks: &[Mark],
    grid_len: usize,
    area: f64,
    normalization: Normalization,
) -> (Vec<f64>, Vec<f64>) {
    let mut case_buckets = vec![0.0; grid_len];
    let mut control_buckets = vec![0.0; grid_len];
    let mut n_case = 0usize;
    for &m in marks {
        if m == Mark::Case {
            n_case += 1;
        }
    }
    let n_control = marks.len() - n_case;
    for p in &pairs.pairs {
        let (mi, mj) = (marks[p.i as usize], marks[p.j as usize]);
        if mi == Mark::Case && mj == Mark::Case {
            case_buckets[p.s_bucket as usize] += p.weight;
        } else if mi == Mark::Control && mj == Mark::Control {
            control_buckets[p.s_bucket as usize] += p.weight;
        }
    }
    (
        k_from_buckets(&case_buckets, normalization.factor(area, n_case)),
        k_from_buckets(&control_buckets, normalization.factor(area, n_control)),
    )
}

/// Which statistic an RL envelope is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatistic {
    /// Diggle's D-function of the labeling.
    DiggleD,
    /// One K-function per class (two envelope runs).
    KPerClass,
}

/// Statistic tracked by a CSR envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsrStatistic {
    KHat,
    LMinusS,
}

/// One statistic with its rank envelope, mean +/- 2 SE band inputs, and the
/// raw replicate curves.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeRun {
    pub label: String,
    /// Observed statistic with the pointwise rank envelope attached.
    pub estimate: FunctionEstimate,
    /// Replicate mean per grid point.
    pub mean: Vec<f64>,
    /// Replicate standard error per grid point.
    pub se: Vec<f64>,
    /// Requested two-sided level.
    pub requested_level: f64,
    /// Achieved exact level `1 - 2k/(m+1)` of the rank envelope.
    pub achieved_level: f64,
    /// Replicate curves, one row per replicate.
    pub replicates: Vec<Vec<f64>>,
}

fn envelope_rank(replicates: usize, level: f64) -> Result<(usize, f64)> {
    if !(0.0..1.0).contains(&(1.0 - level)) || level.is_nan() || level <= 0.0 {
        return Err(Error::Config(format!("invalid envelope level {level}")));
    }
    let m = replicates as f64;
    let k = (((1.0 - level) / 2.0) * (m + 1.0)).round().max(1.0) as usize;
    if 2 * k > replicates {
        return Err(Error::Config(format!(
            "level {level} unattainable with {replicates} replicates"
        )));
    }
    let achieved = 1.0 - 2.0 * k as f64 / (m + 1.0);
    Ok((k, achieved))
}

/// Pointwise rank envelope plus mean/SE from replicate curves.
fn bands_from_replicates(
    replicates: &[Vec<f64>],
    k: usize,
) -> (Envelope, Vec<f64>, Vec<f64>) {
    let m = replicates.len();
    let len = replicates[0].len();
    let mut lower = vec![0.0; len];
    let mut upper = vec![0.0; len];
    let mut mean = vec![0.0; len];
    let mut se = vec![0.0; len];
    let mut column = vec![0.0; m];
    for g in 0..len {
        for (r, row) in replicates.iter().enumerate() {
            column[r] = row[g];
        }
        column.sort_by(|a, b| a.partial_cmp(b).expect("finite statistic"));
        lower[g] = column[k - 1];
        upper[g] = column[m - k];
        let mu = column.iter().sum::<f64>() / m as f64;
        mean[g] = mu;
        let var = column.iter().map(|&v| (v - mu) * (v - mu)).sum::<f64>()
            / (m as f64 - 1.0).max(1.0);
        se[g] = var.sqrt();
    }
    (Envelope { lower, upper }, mean, se)
}

/// Assemble an envelope run from an observed estimate and replicate
/// curves of a null statistic.
pub(crate) fn envelope_run_from_replicates(
    label: &str,
    mut observed: FunctionEstimate,
    reps: Vec<Vec<f64>>,
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<EnvelopeRun> {
    let (k_rank, achieved) = envelope_rank(replicates, level)?;
    let (envelope, mean, se) = bands_from_replicates(&reps, k_rank);
    observed.envelope = Some(envelope);
    observed.meta.replicates = Some(replicates);
    observed.meta.seed = Some(seed);
    observed.validate()?;
    Ok(EnvelopeRun {
        label: label.into(),
        estimate: observed,
        mean,
        se,
        requested_level: level,
        achieved_level: achieved,
        replicates: reps,
    })
}

/// Random-labeling envelope: marks are permuted over fixed locations
/// `replicates` times and the chosen statistic recomputed per replicate.
///
/// Deterministic given the seed; replicates draw from per-index
/// substreams.
pub fn rl_envelope(
    marked: &MarkedPattern,
    grid: &DistanceGrid,
    statistic: RlStatistic,
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<Vec<EnvelopeRun>> {
    if replicates < 2 {
        return Err(Error::Config(format!(
            "RL envelope needs at least 2 replicates, got {replicates}"
        )));
    }
    let n_case = marked.count(Mark::Case);
    let n_control = marked.len() - n_case;
    if n_case < 2 || n_control < 2 {
        return Err(Error::InsufficientData(format!(
            "RL envelope needs >= 2 events per class, got {n_case} cases / {n_control} controls"
        )));
    }
    let (k_rank, achieved) = envelope_rank(replicates, level)?;
    let window = marked.base().window();
    let area = window.area();
    let normalization = Normalization::Unbiased;

    // Locations are fixed under RL, so the edge-weighted pair table is
    // shared by the observed statistic and every replicate.
    let pairs = weighted_pairs(marked.base().points(), window, grid.values())?;

    let observed = class_k_pair(&pairs, marked.marks(), grid.len(), area, normalization);

    let replicate_stats: Vec<(Vec<f64>, Vec<f64>)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, StreamDomain::Envelope, r as u64);
            let shuffled = synth::permuted_marks(marked.marks(), &mut rng);
            class_k_pair(&pairs, &shuffled, grid.len(), area, normalization)
        })
        .collect();

    let make_run = |label: &str,
                    observed_vals: Vec<f64>,
                    reps: Vec<Vec<f64>>,
                    estimator: &str,
                    theoretical: Option<Vec<f64>>|
     -> Result<EnvelopeRun> {
        let (envelope, mean, se) = bands_from_replicates(&reps, k_rank);
        let estimate = FunctionEstimate {
            grid: grid.values().to_vec(),
            values: observed_vals,
            envelope: Some(envelope),
            theoretical,
            meta: EstimateMeta {
                estimator: estimator.into(),
                n_events: marked.len(),
                normalization: Some(normalization),
                replicates: Some(replicates),
                seed: Some(seed),
                clamped_weights: pairs.clamped,
                ..EstimateMeta::default()
            },
        };
        estimate.validate()?;
        Ok(EnvelopeRun {
            label: label.into(),
            estimate,
            mean,
            se,
            requested_level: level,
            achieved_level: achieved,
            replicates: reps,
        })
    };

    match statistic {
        RlStatistic::DiggleD => {
            let observed_d: Vec<f64> = observed.0.iter().zip(&observed.1).map(|(a, b)| a - b).collect();
            let reps: Vec<Vec<f64>> = replicate_stats
                .into_iter()
                .map(|(k1, k2)| k1.iter().zip(&k2).map(|(a, b)| a - b).collect())
                .collect();
            Ok(vec![make_run(
                "d",
                observed_d,
                reps,
                "d-hat-rl",
                Some(vec![0.0; grid.len()]),
            )?])
        }
        RlStatistic::KPerClass => {
            let theoretical: Vec<f64> = grid.values().iter().map(|&s| csr_k_reference(s)).collect();
            let (case_reps, control_reps): (Vec<Vec<f64>>, Vec<Vec<f64>>) =
                replicate_stats.into_iter().unzip();
            Ok(vec![
                make_run(
                    "k-case",
                    observed.0,
                    case_reps,
                    "k-hat-case-rl",
                    Some(theoretical.clone()),
                )?,
                make_run(
                    "k-control",
                    observed.1,
                    control_reps,
                    "k-hat-control-rl",
                    Some(theoretical),
                )?,
            ])
        }
    }
}

/// CSR envelope: replicates are binomial (fixed-n uniform) patterns in the
/// same window; the tracked statistic is K or `L - s`.
pub fn csr_envelope(
    pattern: &PointPattern,
    grid: &DistanceGrid,
    statistic: CsrStatistic,
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<EnvelopeRun> {
    if replicates < 2 {
        return Err(Error::Config(format!(
            "CSR envelope needs at least 2 replicates, got {replicates}"
        )));
    }
    let n = pattern.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "CSR envelope needs n >= 2, got {n}"
        )));
    }
    let (k_rank, achieved) = envelope_rank(replicates, level)?;
    let window = pattern.window();

    let observed_k = k_hat(pattern, grid, Normalization::Unbiased)?;
    let curve = |k_est: &FunctionEstimate| -> Vec<f64> {
        match statistic {
            CsrStatistic::KHat => k_est.values.clone(),
            CsrStatistic::LMinusS => k_est
                .values
                .iter()
                .zip(&k_est.grid)
                .map(|(&v, &s)| (v / std::f64::consts::PI).sqrt() - s)
                .collect(),
        }
    };

    let reps: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, StreamDomain::Envelope, r as u64);
            let sim = synth::uniform_pattern(n, window, &mut rng);
            let k = k_hat(&sim, grid, Normalization::Unbiased).expect("replicate K");
            curve(&k)
        })
        .collect();

    let (envelope, mean, se) = bands_from_replicates(&reps, k_rank);
    let theoretical = match statistic {
        CsrStatistic::KHat => grid.values().iter().map(|&s| csr_k_reference(s)).collect(),
        CsrStatistic::LMinusS => vec![0.0; grid.len()],
    };
    let estimate = FunctionEstimate {
        grid: grid.values().to_vec(),
        values: curve(&observed_k),
        envelope: Some(envelope),
        theoretical: Some(theoretical),
        meta: EstimateMeta {
            estimator: match statistic {
                CsrStatistic::KHat => "k-hat-csr".into(),
                CsrStatistic::LMinusS => "l-minus-s-csr".into(),
            },
            n_events: n,
            normalization: Some(Normalization::Unbiased),
            replicates: Some(replicates),
            seed: Some(seed),
            clamped_weights: observed_k.meta.clamped_weights,
            ..EstimateMeta::default()
        },
    };
    estimate.validate()?;
    Ok(EnvelopeRun {
        label: "csr".into(),
        estimate,
        mean,
        se,
        requested_level: level,
        achieved_level: achieved,
        replicates: reps,
    })
}
