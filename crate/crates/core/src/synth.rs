//! Ground-truth point-process generators.
//!
//! Every generator is a pure function of (spec, window, seed): identical
//! inputs give bit-identical outputs. Offspring of cluster processes that
//! fall outside the window are rejected, not wrapped, so clustering is
//! slightly attenuated near the boundary; fixed-count variants redraw
//! rejected points instead (the conditional-on-n distribution).

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::geometry::{Point, StudyWindow, TimeWindow};
use crate::patterns::{Mark, MarkedPattern, PointPattern, STPattern};
use crate::rng::{stream, StreamDomain};

/// Law of the temporal component of an independent space-time process.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum TemporalLaw {
    /// Times i.i.d. uniform on `(0, T)`.
    Uniform,
    /// Gaussian mixture around uniformly placed centers, truncated to the
    /// window by redraw. Temporally clustered but still independent of
    /// the locations.
    ClusteredNormal { centers: usize, sigma: f64 },
}

/// Parametric intensity surfaces for thinning-based generation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum IntensityModel {
    Constant { value: f64 },
    /// `base + peak * exp(-(|x - c|^2) / (2 sigma^2))`.
    GaussianBump {
        cx: f64,
        cy: f64,
        sigma: f64,
        base: f64,
        peak: f64,
    },
}

impl IntensityModel {
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            IntensityModel::Constant { value } => *value,
            IntensityModel::GaussianBump {
                cx,
                cy,
                sigma,
                base,
                peak,
            } => {
                let d2 = (p.x - cx).powi(2) + (p.y - cy).powi(2);
                base + peak * (-d2 / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            IntensityModel::Constant { value } => *value > 0.0,
            IntensityModel::GaussianBump {
                sigma, base, peak, ..
            } => *sigma > 0.0 && *base >= 0.0 && *peak >= 0.0 && *base + *peak > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config("invalid intensity model parameters".into()))
        }
    }
}

/// Generator kinds with their parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    /// Exactly `n` i.i.d. uniform points (binomial process).
    CsrBinomial { n: usize },
    /// Homogeneous Poisson process: `n ~ Poisson(rate * |A|)`, then uniform.
    PoissonCount { rate: f64 },
    /// Thinned homogeneous process: candidates at `lambda_max`, accepted
    /// with probability `lambda(x) / lambda_max`.
    InhomogeneousThinning {
        #[serde(flatten)]
        model: IntensityModel,
        lambda_max: f64,
    },
    /// Poisson parents, Gaussian offspring. `fixed_n` conditions the total
    /// offspring count.
    ThomasCluster {
        parent_rate: f64,
        mean_offspring: f64,
        sigma: f64,
        #[serde(default)]
        fixed_n: Option<usize>,
    },
    /// Two sub-generators merged into one case/control pattern.
    LabeledSuperposition {
        cases: Box<GeneratorSpec>,
        controls: Box<GeneratorSpec>,
    },
    /// Uniform locations with times drawn independently of them.
    StIndependent {
        n: usize,
        #[serde(default = "default_temporal_law")]
        temporal: TemporalLaw,
    },
    /// Cluster centers shared between space and time: events near a center
    /// in space are near it in time (planted interaction).
    StInteracting {
        n: usize,
        clusters: usize,
        spatial_sigma: f64,
        temporal_sigma: f64,
    },
}

fn default_temporal_law() -> TemporalLaw {
    TemporalLaw::Uniform
}

/// Output of [`generate`], matching the requested kind.
#[derive(Debug, Clone)]
pub enum Generated {
    Points(PointPattern),
    Marked(MarkedPattern),
    SpaceTime(STPattern),
}

impl Generated {
    pub fn into_points(self) -> Result<PointPattern> {
        match self {
            Generated::Points(p) => Ok(p),
            Generated::Marked(m) => Ok(m.base().clone()),
            Generated::SpaceTime(s) => Ok(s.base().clone()),
        }
    }

    pub fn into_marked(self) -> Result<MarkedPattern> {
        match self {
            Generated::Marked(m) => Ok(m),
            _ => Err(Error::Config("generator does not produce marks".into())),
        }
    }

    pub fn into_st(self) -> Result<STPattern> {
        match self {
            Generated::SpaceTime(s) => Ok(s),
            _ => Err(Error::Config("generator does not produce times".into())),
        }
    }
}

const MAX_REJECTION_FACTOR: usize = 100_000;

/// Draw a pattern from `spec` inside `window` (and `time_window` for the
/// space-time kinds). Deterministic given the seed.
pub fn generate(
    spec: &GeneratorSpec,
    window: &StudyWindow,
    time_window: Option<&TimeWindow>,
    seed: u64,
) -> Result<Generated> {
    let mut rng = stream(seed, StreamDomain::Generate, 0);
    generate_with(spec, window, time_window, &mut rng)
}

fn generate_with<R: Rng>(
    spec: &GeneratorSpec,
    window: &StudyWindow,
    time_window: Option<&TimeWindow>,
    rng: &mut R,
) -> Result<Generated> {
    match spec {
        GeneratorSpec::CsrBinomial { n } => {
            Ok(Generated::Points(uniform_pattern(*n, window, rng)))
        }
        GeneratorSpec::PoissonCount { rate } => {
            if rate.is_nan() || *rate <= 0.0 {
                return Err(Error::Config(format!("rate must be positive, got {rate}")));
            }
            let n = Poisson::new(rate * window.area())
                .map_err(|e| Error::Config(format!("invalid Poisson mean: {e}")))?
                .sample(rng) as usize;
            Ok(Generated::Points(uniform_pattern(n, window, rng)))
        }
        GeneratorSpec::InhomogeneousThinning { model, lambda_max } => {
            model.validate()?;
            if lambda_max.is_nan() || *lambda_max <= 0.0 {
                return Err(Error::Config(format!(
                    "lambda_max must be positive, got {lambda_max}"
                )));
            }
            let candidates = Poisson::new(lambda_max * window.area())
                .map_err(|e| Error::Config(format!("invalid Poisson mean: {e}")))?
                .sample(rng) as usize;
            let mut pts = Vec::new();
            for _ in 0..candidates {
                let p = uniform_point(window, rng);
                let keep: f64 = rng.random();
                if keep < (model.eval(p) / lambda_max).min(1.0) {
                    pts.push(p);
                }
            }
            Ok(Generated::Points(PointPattern::new(pts, window.clone())?))
        }
        GeneratorSpec::ThomasCluster {
            parent_rate,
            mean_offspring,
            sigma,
            fixed_n,
        } => {
            if [*parent_rate, *mean_offspring, *sigma].iter().any(|p| p.is_nan() || *p <= 0.0) {
                return Err(Error::Config(
                    "Thomas process needs positive parent rate, offspring mean, and sigma".into(),
                ));
            }
            let parents = thomas_parents(*parent_rate, window, fixed_n.is_some(), rng)?;
            let normal = Normal::new(0.0, *sigma).expect("sigma > 0");
            let pts = match fixed_n {
                None => {
                    let mut pts = Vec::new();
                    let per_parent = Poisson::new(*mean_offspring)
                        .map_err(|e| Error::Config(format!("invalid offspring mean: {e}")))?;
                    for &parent in &parents {
                        let k = per_parent.sample(rng) as usize;
                        for _ in 0..k {
                            let p = Point::new(
                                parent.x + normal.sample(rng),
                                parent.y + normal.sample(rng),
                            );
                            if window.contains(p) {
                                pts.push(p);
                            }
                        }
                    }
                    pts
                }
                Some(n) => {
                    let mut pts = Vec::with_capacity(*n);
                    let mut attempts = 0usize;
                    let budget = MAX_REJECTION_FACTOR * (*n).max(1);
                    while pts.len() < *n {
                        attempts += 1;
                        if attempts > budget {
                            return Err(Error::Config(
                                "cluster generation exceeded its rejection budget; widen sigma or the window".into(),
                            ));
                        }
                        let parent = parents[rng.random_range(0..parents.len())];
                        let p = Point::new(
                            parent.x + normal.sample(rng),
                            parent.y + normal.sample(rng),
                        );
                        if window.contains(p) {
                            pts.push(p);
                        }
                    }
                    pts
                }
            };
            Ok(Generated::Points(PointPattern::new(pts, window.clone())?))
        }
        GeneratorSpec::LabeledSuperposition { cases, controls } => {
            let case_pts = generate_with(cases, window, None, rng)?.into_points()?;
            let control_pts = generate_with(controls, window, None, rng)?.into_points()?;
            let mut points = case_pts.points().to_vec();
            let mut marks = vec![Mark::Case; points.len()];
            points.extend_from_slice(control_pts.points());
            marks.extend(std::iter::repeat_n(Mark::Control, control_pts.len()));
            Ok(Generated::Marked(MarkedPattern::new(
                PointPattern::new(points, window.clone())?,
                marks,
            )?))
        }
        GeneratorSpec::StIndependent { n, temporal } => {
            let tw = required_time_window(time_window)?;
            let base = uniform_pattern(*n, window, rng);
            let times = draw_times(*n, temporal, tw, rng)?;
            Ok(Generated::SpaceTime(STPattern::new(base, times, *tw)?))
        }
        GeneratorSpec::StInteracting {
            n,
            clusters,
            spatial_sigma,
            temporal_sigma,
        } => {
            let tw = required_time_window(time_window)?;
            if *clusters == 0 || [*spatial_sigma, *temporal_sigma].iter().any(|p| p.is_nan() || *p <= 0.0) {
                return Err(Error::Config(
                    "interacting process needs clusters >= 1 and positive sigmas".into(),
                ));
            }
            let centers: Vec<(Point, f64)> = (0..*clusters)
                .map(|_| {
                    (
                        uniform_point(window, rng),
                        rng.random::<f64>() * tw.length(),
                    )
                })
                .collect();
            let s_normal = Normal::new(0.0, *spatial_sigma).expect("sigma > 0");
            let t_normal = Normal::new(0.0, *temporal_sigma).expect("sigma > 0");
            let mut pts = Vec::with_capacity(*n);
            let mut times = Vec::with_capacity(*n);
            let budget = MAX_REJECTION_FACTOR * (*n).max(1);
            let mut attempts = 0usize;
            while pts.len() < *n {
                attempts += 1;
                if attempts > budget {
                    return Err(Error::Config(
                        "interacting generation exceeded its rejection budget".into(),
                    ));
                }
                let (c, tau) = centers[rng.random_range(0..centers.len())];
                let p = Point::new(c.x + s_normal.sample(rng), c.y + s_normal.sample(rng));
                if !window.contains(p) {
                    continue;
                }
                let t = tau + t_normal.sample(rng);
                if !tw.contains(t) {
                    continue;
                }
                pts.push(p);
                times.push(t);
            }
            Ok(Generated::SpaceTime(STPattern::new(
                PointPattern::new(pts, window.clone())?,
                times,
                *tw,
            )?))
        }
    }
}

fn required_time_window(tw: Option<&TimeWindow>) -> Result<&TimeWindow> {
    tw.ok_or_else(|| Error::Config("space-time generator needs a time window".into()))
}

fn thomas_parents<R: Rng>(
    parent_rate: f64,
    window: &StudyWindow,
    require_nonempty: bool,
    rng: &mut R,
) -> Result<Vec<Point>> {
    let dist = Poisson::new(parent_rate * window.area())
        .map_err(|e| Error::Config(format!("invalid parent mean: {e}")))?;
    let mut count = dist.sample(rng) as usize;
    if require_nonempty {
        let mut tries = 0;
        while count == 0 {
            tries += 1;
            if tries > MAX_REJECTION_FACTOR {
                return Err(Error::Config("parent process kept coming up empty".into()));
            }
            count = dist.sample(rng) as usize;
        }
    }
    Ok((0..count).map(|_| uniform_point(window, rng)).collect())
}

fn draw_times<R: Rng>(
    n: usize,
    law: &TemporalLaw,
    tw: &TimeWindow,
    rng: &mut R,
) -> Result<Vec<f64>> {
    match law {
        TemporalLaw::Uniform => Ok((0..n).map(|_| rng.random::<f64>() * tw.length()).collect()),
        TemporalLaw::ClusteredNormal { centers, sigma } => {
            if *centers == 0 || sigma.is_nan() || *sigma <= 0.0 {
                return Err(Error::Config(
                    "clustered temporal law needs centers >= 1 and positive sigma".into(),
                ));
            }
            let mids: Vec<f64> = (0..*centers)
                .map(|_| rng.random::<f64>() * tw.length())
                .collect();
            let normal = Normal::new(0.0, *sigma).expect("sigma > 0");
            let mut times = Vec::with_capacity(n);
            let budget = MAX_REJECTION_FACTOR * n.max(1);
            let mut attempts = 0usize;
            while times.len() < n {
                attempts += 1;
                if attempts > budget {
                    return Err(Error::Config(
                        "temporal clustering exceeded its rejection budget".into(),
                    ));
                }
                let t = mids[rng.random_range(0..mids.len())] + normal.sample(rng);
                if tw.contains(t) {
                    times.push(t);
                }
            }
            Ok(times)
        }
    }
}

/// One point uniform on the window (rejection from the bounding box for
/// polygons).
pub(crate) fn uniform_point<R: Rng>(window: &StudyWindow, rng: &mut R) -> Point {
    let (lo, hi) = window.bounding_box();
    loop {
        let p = Point::new(
            lo.x + rng.random::<f64>() * (hi.x - lo.x),
            lo.y + rng.random::<f64>() * (hi.y - lo.y),
        );
        if window.contains(p) {
            return p;
        }
    }
}

/// Exactly `n` i.i.d. uniform points.
pub(crate) fn uniform_pattern<R: Rng>(n: usize, window: &StudyWindow, rng: &mut R) -> PointPattern {
    let pts = (0..n).map(|_| uniform_point(window, rng)).collect();
    PointPattern::new(pts, window.clone()).expect("uniform points lie in the window")
}

/// Fisher-Yates permutation of a mark vector.
pub(crate) fn permuted_marks<R: Rng>(marks: &[Mark], rng: &mut R) -> Vec<Mark> {
    let mut out = marks.to_vec();
    out.shuffle(rng);
    out
}

/// Random-labeling null draw: locations unchanged, marks permuted
/// uniformly over all assignments that preserve the mark multiset.
pub fn random_relabel(marked: &MarkedPattern, seed: u64) -> MarkedPattern {
    let mut rng = stream(seed, StreamDomain::Relabel, 0);
    let marks = permuted_marks(marked.marks(), &mut rng);
    MarkedPattern::new(marked.base().clone(), marks).expect("mark count preserved")
}

/// Time-permutation null draw: locations fixed, times a uniform random
/// permutation of the original multiset.
pub fn permute_times(pattern: &STPattern, seed: u64) -> STPattern {
    let mut rng = stream(seed, StreamDomain::PermuteTimes, 0);
    let mut times = pattern.times().to_vec();
    times.shuffle(&mut rng);
    pattern
        .with_times(times)
        .expect("permuted times stay in the window")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn unit_window() -> StudyWindow {
        StudyWindow::unit_square()
    }

    #[test]
    fn csr_binomial_has_exact_count() {
        let g = generate(&GeneratorSpec::CsrBinomial { n: 50 }, &unit_window(), None, 1)
            .unwrap()
            .into_points()
            .unwrap();
        assert_eq!(g.len(), 50);
        assert!(g.points().iter().all(|p| unit_window().contains(*p)));
    }

    #[test]
    fn generators_are_seed_deterministic() {
        let spec = GeneratorSpec::ThomasCluster {
            parent_rate: 10.0,
            mean_offspring: 8.0,
            sigma: 0.03,
            fixed_n: None,
        };
        let a = generate(&spec, &unit_window(), None, 99).unwrap().into_points().unwrap();
        let b = generate(&spec, &unit_window(), None, 99).unwrap().into_points().unwrap();
        assert_eq!(a.points(), b.points());
        let c = generate(&spec, &unit_window(), None, 100).unwrap().into_points().unwrap();
        assert!(a.points() != c.points() || a.len() != c.len());
    }

    #[test]
    fn fixed_n_cluster_has_exact_count() {
        let spec = GeneratorSpec::ThomasCluster {
            parent_rate: 5.0,
            mean_offspring: 20.0,
            sigma: 0.02,
            fixed_n: Some(100),
        };
        let g = generate(&spec, &unit_window(), None, 4).unwrap().into_points().unwrap();
        assert_eq!(g.len(), 100);
    }

    #[test]
    fn labeled_superposition_marks_both_classes() {
        let spec = GeneratorSpec::LabeledSuperposition {
            cases: Box::new(GeneratorSpec::CsrBinomial { n: 10 }),
            controls: Box::new(GeneratorSpec::CsrBinomial { n: 15 }),
        };
        let m = generate(&spec, &unit_window(), None, 5).unwrap().into_marked().unwrap();
        assert_eq!(m.count(Mark::Case), 10);
        assert_eq!(m.count(Mark::Control), 15);
    }

    #[test]
    fn st_independent_times_in_window() {
        let tw = TimeWindow::new(10.0, crate::geometry::TimeResolution::Abstract).unwrap();
        let spec = GeneratorSpec::StIndependent {
            n: 64,
            temporal: TemporalLaw::Uniform,
        };
        let st = generate(&spec, &unit_window(), Some(&tw), 8).unwrap().into_st().unwrap();
        assert_eq!(st.len(), 64);
        assert!(st.times().iter().all(|&t| (0.0..=10.0).contains(&t)));
    }

    #[test]
    fn st_generator_without_time_window_is_config_error() {
        let spec = GeneratorSpec::StIndependent {
            n: 5,
            temporal: TemporalLaw::Uniform,
        };
        assert!(matches!(
            generate(&spec, &unit_window(), None, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn relabel_preserves_mark_multiset() {
        let base = uniform_pattern(10, &unit_window(), &mut stream(3, StreamDomain::Generate, 0));
        let marks: Vec<Mark> = (0..10)
            .map(|i| if i < 4 { Mark::Case } else { Mark::Control })
            .collect();
        let m = MarkedPattern::new(base, marks).unwrap();
        let r = random_relabel(&m, 77);
        assert_eq!(r.count(Mark::Case), 4);
        assert_eq!(r.count(Mark::Control), 6);
        assert_eq!(r.base().points(), m.base().points());
    }

    #[test]
    fn relabel_single_point_is_identity() {
        let base = PointPattern::new(vec![Point::new(0.5, 0.5)], unit_window()).unwrap();
        let m = MarkedPattern::new(base, vec![Mark::Case]).unwrap();
        let r = random_relabel(&m, 0);
        assert_eq!(r.marks(), m.marks());
    }

    #[test]
    fn relabel_is_uniform_over_assignments() {
        // 5 points with 2 case marks: C(5,2) = 10 assignments, each should
        // appear with frequency 0.1 +/- 0.02 over 10^4 relabelings.
        let base = uniform_pattern(5, &unit_window(), &mut stream(11, StreamDomain::Generate, 0));
        let marks = vec![Mark::Case, Mark::Case, Mark::Control, Mark::Control, Mark::Control];
        let m = MarkedPattern::new(base, marks).unwrap();
        let mut freq: HashMap<Vec<bool>, usize> = HashMap::new();
        let trials = 10_000;
        for s in 0..trials {
            let r = random_relabel(&m, s as u64);
            let key: Vec<bool> = r.marks().iter().map(|&mk| mk == Mark::Case).collect();
            *freq.entry(key).or_insert(0) += 1;
        }
        assert_eq!(freq.len(), 10);
        for (_, count) in freq {
            let f = count as f64 / trials as f64;
            assert!((f - 0.1).abs() < 0.02, "assignment frequency {f} out of range");
        }
    }

    #[test]
    fn permute_times_preserves_multiset() {
        let tw = TimeWindow::new(10.0, crate::geometry::TimeResolution::Abstract).unwrap();
        let base = uniform_pattern(12, &unit_window(), &mut stream(5, StreamDomain::Generate, 0));
        let times: Vec<f64> = (0..12).map(|i| i as f64 * 0.8).collect();
        let st = STPattern::new(base, times.clone(), tw).unwrap();
        let p = permute_times(&st, 123);
        let mut a = times;
        let mut b = p.times().to_vec();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(a, b);
        assert_eq!(p.points(), st.points());
    }

    #[test]
    fn permute_single_time_is_identity() {
        let tw = TimeWindow::new(1.0, crate::geometry::TimeResolution::Abstract).unwrap();
        let base = PointPattern::new(vec![Point::new(0.1, 0.1)], unit_window()).unwrap();
        let st = STPattern::new(base, vec![0.4], tw).unwrap();
        assert_eq!(permute_times(&st, 9).times(), st.times());
    }

    #[test]
    fn invalid_parameters_are_config_errors() {
        assert!(matches!(
            generate(&GeneratorSpec::PoissonCount { rate: -1.0 }, &unit_window(), None, 0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            generate(
                &GeneratorSpec::ThomasCluster {
                    parent_rate: 1.0,
                    mean_offspring: 5.0,
                    sigma: 0.0,
                    fixed_n: None
                },
                &unit_window(),
                None,
                0
            ),
            Err(Error::Config(_))
        ));
    }
}
