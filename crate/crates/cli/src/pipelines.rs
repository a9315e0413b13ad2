//! Pipeline implementations: each one ingests the configured data, runs
//! the matching estimators, and emits tables plus SVG plots into the
//! output directory.

use std::path::{Path, PathBuf};

use stpp_core::error::{Error, Result};
use stpp_core::geometry::TimeWindow;
use stpp_core::intensity::{intensity_estimate, intensity_ratio, GridSpec, IntensityVariant};
use stpp_core::patterns::{
    ingest, split_marks, temporal_histogram, IngestSchema, Ingested, LabelColumns, Mark,
    MarkedPattern, PointPattern, STPattern,
};
use stpp_core::secondorder::{
    csr_envelope, d_hat, rl_envelope, CsrStatistic, DistanceGrid, RlStatistic, TimeLagGrid,
};
use stpp_core::spacetime::{
    d0_hat_st, d_hat_st, default_variance_floor, interaction_tests, k_hat_space, k_hat_st,
    k_hat_time, residual_grid, u_statistic, uniform_time_envelope, variance_grid,
};
use stpp_core::validation::{run_all, ValidationConfig};
use stpp_core::{svg, table};

use crate::config::{AnalysisConfig, ClassSelect};
use crate::data::{prepare_table, stratify_rows, PreparedTable};

/// The batch pipelines exposed by `run --pipeline`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Pipeline {
    /// Kernel intensity surfaces (cases/controls/ratio when labeled).
    Intensity,
    /// L-function with a CSR envelope.
    CsrL,
    /// Diggle's D-function with a random-labeling envelope.
    DiggleD,
    /// Temporal frequency histogram.
    TemporalHist,
    /// Temporal K-function with uniform-times band.
    TemporalK,
    /// Spatio-temporal K-function and components.
    StK,
    /// Space-time diagnostics: D(s,t), D0, variance/SE, residuals.
    StDiagnostics,
    /// Monte Carlo and Gaussian space-time interaction tests.
    StMcTest,
    /// Run the synthetic-oracle validation table.
    SynthValidate,
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Intensity => "intensity",
            Pipeline::CsrL => "csr-l",
            Pipeline::DiggleD => "diggle-d",
            Pipeline::TemporalHist => "temporal-hist",
            Pipeline::TemporalK => "temporal-k",
            Pipeline::StK => "st-k",
            Pipeline::StDiagnostics => "st-diagnostics",
            Pipeline::StMcTest => "st-mc-test",
            Pipeline::SynthValidate => "synth-validate",
        }
    }

    fn needs_times(&self) -> bool {
        matches!(
            self,
            Pipeline::TemporalHist
                | Pipeline::TemporalK
                | Pipeline::StK
                | Pipeline::StDiagnostics
                | Pipeline::StMcTest
        )
    }
}

/// Files, warnings, and report lines produced by one pipeline run.
#[derive(Debug, Default)]
pub struct PipelineOutput {
    /// Paths relative to the output root.
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    /// Human-readable result lines (also printed to stdout).
    pub summary: Vec<String>,
}

impl PipelineOutput {
    fn merge(&mut self, other: PipelineOutput) {
        self.files.extend(other.files);
        self.warnings.extend(other.warnings);
        self.summary.extend(other.summary);
    }
}

struct Emitter<'a> {
    out_root: &'a Path,
    prefix: PathBuf,
    output: PipelineOutput,
}

impl<'a> Emitter<'a> {
    fn new(out_root: &'a Path, prefix: &Path) -> Emitter<'a> {
        Emitter {
            out_root,
            prefix: prefix.to_path_buf(),
            output: PipelineOutput::default(),
        }
    }

    fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let rel = self.prefix.join(name);
        let full = self.out_root.join(&rel);
        if let Some(parent) = full.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&full, bytes)?;
        self.output.files.push(rel);
        Ok(())
    }

    fn warn(&mut self, msg: String) {
        self.output.warnings.push(msg);
    }

    fn say(&mut self, msg: String) {
        self.output.summary.push(msg);
    }
}

/// Execute one pipeline (stratified when configured) under the output
/// root. Re-running with identical config and seed reproduces every table
/// and SVG byte for byte.
pub fn run_pipeline(
    cfg: &AnalysisConfig,
    pipeline: Pipeline,
    out_root: &Path,
) -> Result<PipelineOutput> {
    std::fs::create_dir_all(out_root)?;
    if pipeline == Pipeline::SynthValidate {
        let mut em = Emitter::new(out_root, Path::new(""));
        synth_validate(cfg, &mut em)?;
        return Ok(em.output);
    }

    let table = prepare_table(cfg)?;
    match &cfg.stratify {
        None => {
            let mut em = Emitter::new(out_root, Path::new(""));
            let data = ingest_document(cfg, &table, table.full_document())?;
            run_on_data(cfg, pipeline, &data, &mut em)?;
            Ok(em.output)
        }
        Some(strat) => {
            if !pipeline.needs_times() && cfg.input()?.time.is_none() {
                return Err(Error::Config(
                    "stratification needs a mapped time column".into(),
                ));
            }
            let time_kind = cfg.input()?.time_kind;
            let (strata, unassigned) = stratify_rows(&table, strat.by, time_kind)?;
            let mut output = PipelineOutput::default();
            if unassigned > 0 {
                output.warnings.push(format!(
                    "{unassigned} rows had no usable time and were not assigned to any stratum"
                ));
            }
            if strata.is_empty() {
                return Err(Error::EmptyPattern("no stratum contains any rows".into()));
            }
            for stratum in &strata {
                let prefix = PathBuf::from(format!("stratum-{}", stratum.label));
                let mut em = Emitter::new(out_root, &prefix);
                let doc =
                    table.document(stratum.row_indices.iter().map(|&i| &table.rows[i]));
                let result = ingest_document(cfg, &table, doc)
                    .and_then(|data| run_on_data(cfg, pipeline, &data, &mut em));
                match result {
                    Ok(()) => {
                        let mut sub = std::mem::take(&mut em.output);
                        sub.summary = sub
                            .summary
                            .into_iter()
                            .map(|s| format!("[{}] {s}", stratum.label))
                            .collect();
                        output.merge(sub);
                    }
                    Err(Error::InsufficientData(msg)) | Err(Error::EmptyPattern(msg)) => {
                        output.warnings.push(format!(
                            "stratum {} skipped: {msg}",
                            stratum.label
                        ));
                    }
                    Err(other) => return Err(other),
                }
            }
            Ok(output)
        }
    }
}

fn ingest_document(
    cfg: &AnalysisConfig,
    table: &PreparedTable,
    document: String,
) -> Result<Ingested> {
    let input = cfg.input()?;
    let label = match (&input.label, &input.case_value, &input.control_value) {
        (None, _, _) => None,
        (Some(col), Some(case), Some(control)) => Some(LabelColumns {
            column: col.clone(),
            case_value: case.clone(),
            control_value: control.clone(),
        }),
        (Some(_), _, _) => {
            return Err(Error::Config(
                "label column needs case_value and control_value".into(),
            ))
        }
    };
    let schema = IngestSchema {
        x_column: input.x.clone(),
        y_column: input.y.clone(),
        time_column: input.time.clone(),
        label,
        delimiter: Some(table.delimiter),
    };
    let window = cfg.window()?;
    ingest(
        document.as_bytes(),
        &schema,
        &window,
        table.time_window.as_ref(),
    )
}

fn run_on_data(
    cfg: &AnalysisConfig,
    pipeline: Pipeline,
    data: &Ingested,
    em: &mut Emitter,
) -> Result<()> {
    let report = &data.report;
    if report.rows_rejected() > 0 {
        em.warn(format!(
            "ingest rejected {} rows (out-of-window {}, unparseable {}, missing-field {})",
            report.rows_rejected(),
            report.rejected_out_of_window,
            report.rejected_unparseable,
            report.rejected_missing_field
        ));
    }
    if report.duplicate_count > 0 {
        em.warn(format!(
            "{} duplicate events retained",
            report.duplicate_count
        ));
    }
    match pipeline {
        Pipeline::Intensity => intensity_pipeline(cfg, data, em),
        Pipeline::CsrL => csr_l_pipeline(cfg, data, em),
        Pipeline::DiggleD => diggle_d_pipeline(cfg, data, em),
        Pipeline::TemporalHist => temporal_hist_pipeline(cfg, data, em),
        Pipeline::TemporalK => temporal_k_pipeline(cfg, data, em),
        Pipeline::StK => st_k_pipeline(cfg, data, em),
        Pipeline::StDiagnostics => st_diagnostics_pipeline(cfg, data, em),
        Pipeline::StMcTest => st_mc_test_pipeline(cfg, data, em),
        Pipeline::SynthValidate => unreachable!("handled before ingestion"),
    }
}

fn marked_of(data: &Ingested) -> Result<MarkedPattern> {
    data.clone().into_marked()
}

fn st_of(data: &Ingested, class: Option<ClassSelect>) -> Result<STPattern> {
    let times = data
        .times
        .clone()
        .ok_or_else(|| Error::Config("this pipeline needs a mapped time column".into()))?;
    let tw = data
        .time_window
        .ok_or_else(|| Error::Config("this pipeline needs a time window".into()))?;
    match (&data.marks, class.unwrap_or(ClassSelect::Case)) {
        (Some(marks), ClassSelect::Case) | (Some(marks), ClassSelect::Control) => {
            let want = if class.unwrap_or(ClassSelect::Case) == ClassSelect::Case {
                Mark::Case
            } else {
                Mark::Control
            };
            let mut pts = Vec::new();
            let mut ts = Vec::new();
            for ((p, m), t) in data
                .pattern
                .points()
                .iter()
                .zip(marks)
                .zip(&times)
            {
                if *m == want {
                    pts.push(*p);
                    ts.push(*t);
                }
            }
            STPattern::new(
                PointPattern::new(pts, data.pattern.window().clone())?,
                ts,
                tw,
            )
        }
        _ => STPattern::new(data.pattern.clone(), times, tw),
    }
}

fn s_grid_for(cfg: &AnalysisConfig, window: &stpp_core::StudyWindow) -> Result<DistanceGrid> {
    let count = cfg.grids.s_count.unwrap_or(10);
    let s_max = cfg
        .grids
        .s_max
        .unwrap_or_else(|| 0.25 * window.diameter());
    DistanceGrid::linspace(s_max, count)
}

fn t_grid_for(cfg: &AnalysisConfig, tw: &TimeWindow) -> Result<TimeLagGrid> {
    let count = cfg.grids.t_count.unwrap_or(10);
    let t_max = cfg.grids.t_max.unwrap_or_else(|| 0.5 * tw.length());
    TimeLagGrid::linspace(t_max, count)
}

fn intensity_pipeline(cfg: &AnalysisConfig, data: &Ingested, em: &mut Emitter) -> Result<()> {
    let icfg = cfg
        .intensity
        .as_ref()
        .ok_or_else(|| Error::Config("intensity pipeline needs an [intensity] section".into()))?;
    let n = icfg.grid.unwrap_or(256);
    let grid = GridSpec { nx: n, ny: n };
    let variant = icfg.variant.unwrap_or(IntensityVariant::Normalized);

    match &data.marks {
        Some(_) => {
            let marked = marked_of(data)?;
            let (cases, controls) = split_marks(&marked)?;
            let s_case = intensity_estimate(&cases, icfg.bandwidth, grid, variant)?;
            let s_control = intensity_estimate(&controls, icfg.bandwidth, grid, variant)?;
            let ratio = intensity_ratio(&s_case, &s_control, icfg.ratio_floor.unwrap_or(1e-9))?;
            let mut buf = Vec::new();
            table::write_intensity(&mut buf, &s_case)?;
            em.emit("intensity_case.csv", &buf)?;
            em.emit(
                "intensity_case.svg",
                svg::raster_heatmap(&s_case.raster, "case intensity").as_bytes(),
            )?;
            buf.clear();
            table::write_intensity(&mut buf, &s_control)?;
            em.emit("intensity_control.csv", &buf)?;
            em.emit(
                "intensity_control.svg",
                svg::raster_heatmap(&s_control.raster, "control intensity").as_bytes(),
            )?;
            buf.clear();
            table::write_raster(&mut buf, &ratio, &[("kind", "intensity-ratio".into())])?;
            em.emit("intensity_ratio.csv", &buf)?;
            em.emit(
                "intensity_ratio.svg",
                svg::raster_heatmap(&ratio, "case/control intensity ratio").as_bytes(),
            )?;
            em.emit(
                "scatter.svg",
                svg::point_map(marked.base(), Some(&marked), "event locations").as_bytes(),
            )?;
            em.say(format!(
                "intensity: {} cases, {} controls, bandwidth {}",
                cases.len(),
                controls.len(),
                icfg.bandwidth
            ));
        }
        None => {
            let surface = intensity_estimate(&data.pattern, icfg.bandwidth, grid, variant)?;
            if let Some(w) = &surface.warning {
                em.warn(w.clone());
            }
            let mut buf = Vec::new();
            table::write_intensity(&mut buf, &surface)?;
            em.emit("intensity.csv", &buf)?;
            em.emit(
                "intensity.svg",
                svg::raster_heatmap(&surface.raster, "intensity").as_bytes(),
            )?;
            em.emit(
                "scatter.svg",
                svg::point_map(&data.pattern, None, "event locations").as_bytes(),
            )?;
            em.say(format!(
                "intensity: {} events, bandwidth {}",
                data.pattern.len(),
                icfg.bandwidth
            ));
        }
    }
    Ok(())
}

fn class_points(data: &Ingested, class: ClassSelect) -> Result<PointPattern> {
    match (class, &data.marks) {
        (ClassSelect::All, _) | (_, None) => Ok(data.pattern.clone()),
        (want, Some(_)) => {
            let marked = marked_of(data)?;
            let (cases, controls) = split_marks(&marked)?;
            Ok(match want {
                ClassSelect::Case => cases,
                ClassSelect::Control => controls,
                ClassSelect::All => unreachable!(),
            })
        }
    }
}

fn csr_l_pipeline(cfg: &AnalysisConfig, data: &Ingested, em: &mut Emitter) -> Result<()> {
    let seed = cfg.seed()?;
    let pattern = class_points(data, cfg.csr.class)?;
    let grid = s_grid_for(cfg, pattern.window())?;
    let run = csr_envelope(
        &pattern,
        &grid,
        CsrStatistic::LMinusS,
        cfg.mc.envelope_replicates(),
        cfg.mc.level(),
        seed,
    )?;
    push_estimate_warnings(&run.estimate.meta, em);
    let mut buf = Vec::new();
    table::write_function_estimate(&mut buf, &run.estimate)?;
    em.emit("l_csr.csv", &buf)?;
    buf.clear();
    table::write_envelope_bands(&mut buf, &run)?;
    em.emit("l_csr_bands.csv", &buf)?;
    em.emit(
        "l_plot.svg",
        svg::function_plot(&run.estimate, "L(s) - s with CSR envelope", "s", "L(s) - s")
            .as_bytes(),
    )?;
    em.say(format!(
        "csr-l: n = {}, {} replicates, level {:.3}",
        pattern.len(),
        cfg.mc.envelope_replicates(),
        run.achieved_level
    ));
    Ok(())
}

fn diggle_d_pipeline(cfg: &AnalysisConfig, data: &Ingested, em: &mut Emitter) -> Result<()> {
    let seed = cfg.seed()?;
    let marked = marked_of(data)?;
    let grid = s_grid_for(cfg, marked.base().window())?;
    let d = d_hat(&marked, &grid, cfg.estimator.normalization)?;
    let runs = rl_envelope(
        &marked,
        &grid,
        RlStatistic::DiggleD,
        cfg.mc.envelope_replicates(),
        cfg.mc.level(),
        seed,
    )?;
    let run = &runs[0];
    push_estimate_warnings(&run.estimate.meta, em);
    let mut buf = Vec::new();
    table::write_function_estimate(&mut buf, &d)?;
    em.emit("d_hat.csv", &buf)?;
    buf.clear();
    table::write_envelope_bands(&mut buf, run)?;
    em.emit("d_envelope.csv", &buf)?;
    em.emit(
        "d_plot.svg",
        svg::function_plot(
            &run.estimate,
            "D(s) with random-labeling envelope",
            "s",
            "D(s)",
        )
        .as_bytes(),
    )?;
    let above = run
        .estimate
        .values
        .iter()
        .zip(&run.estimate.envelope.as_ref().unwrap().upper)
        .filter(|(v, u)| v > u)
        .count();
    em.say(format!(
        "diggle-d: {} cases / {} controls; D above the upper envelope at {}/{} grid points",
        marked.count(Mark::Case),
        marked.len() - marked.count(Mark::Case),
        above,
        grid.len()
    ));
    Ok(())
}

fn temporal_hist_pipeline(cfg: &AnalysisConfig, data: &Ingested, em: &mut Emitter) -> Result<()> {
    let st = st_of(data, cfg.spacetime.class)?;
    let bin = cfg
        .hist
        .bin
        .unwrap_or_else(|| st.time_window().resolution());
    let hist = temporal_histogram(&st, bin)?;
    if let Some(w) = &hist.warning {
        em.warn(w.clone());
    }
    let mut buf = Vec::new();
    table::write_histogram(&mut buf, &hist)?;
    em.emit("temporal_hist.csv", &buf)?;
    em.emit(
        "temporal_hist.svg",
        svg::histogram_bars(
            &hist.counts,
            hist.bin_width,
            "event frequency over time",
            "time",
        )
        .as_bytes(),
    )?;
    em.say(format!(
        "temporal-hist: {} events in {} bins",
        hist.total(),
        hist.counts.len()
    ));
    Ok(())
}

fn temporal_k_pipeline(cfg: &AnalysisConfig, data: &Ingested, em: &mut Emitter) -> Result<()> {
    let seed = cfg.seed()?;
    let st = st_of(data, cfg.spacetime.class)?;
    let t_grid = t_grid_for(cfg, st.time_window())?;
    let run = uniform_time_envelope(
        &st,
        &t_grid,
        cfg.mc.envelope_replicates(),
        cfg.mc.level(),
        seed,
    )?;
    let mut buf = Vec::new();
    table::write_function_estimate(&mut buf, &run.estimate)?;
    em.emit("temporal_k.csv", &buf)?;
    buf.clear();
    table::write_envelope_bands(&mut buf, &run)?;
    em.emit("temporal_k_bands.csv", &buf)?;
    em.emit(
        "temporal_k.svg",
        svg::function_plot(
            &run.estimate,
            "temporal K with uniform-times band",
            "t",
            "K(t)",
        )
        .as_bytes(),
    )?;
    em.say(format!("temporal-k: n = {}", st.len()));
    Ok(())
}

fn st_k_pipeline(cfg: &AnalysisConfig, data: &Ingested, em: &mut Emitter) -> Result<()> {
    let st = st_of(data, cfg.spacetime.class)?;
    let s_grid = s_grid_for(cfg, st.window())?;
    let t_grid = t_grid_for(cfg, st.time_window())?;
    let k = k_hat_st(&st, &s_grid, &t_grid)?;
    if k.clamped_weights > 0 {
        em.warn(format!("{} clamped edge weights", k.clamped_weights));
    }
    let k1 = k_hat_space(&st, &s_grid)?;
    let k2 = k_hat_time(&st, &t_grid)?;
    let mut buf = Vec::new();
    table::write_st_grid(&mut buf, &k)?;
    em.emit("st_k.csv", &buf)?;
    buf.clear();
    table::write_function_estimate(&mut buf, &k1)?;
    em.emit("k_space.csv", &buf)?;
    buf.clear();
    table::write_function_estimate(&mut buf, &k2)?;
    em.emit("k_time.csv", &buf)?;
    em.emit(
        "st_k.svg",
        svg::st_grid_heatmap(&k, "space-time K", "s", "t").as_bytes(),
    )?;
    em.say(format!("st-k: n = {}", st.len()));
    Ok(())
}

fn st_diagnostics_pipeline(cfg: &AnalysisConfig, data: &Ingested, em: &mut Emitter) -> Result<()> {
    let seed = cfg.seed()?;
    let st = st_of(data, cfg.spacetime.class)?;
    let s_grid = s_grid_for(cfg, st.window())?;
    let t_grid = t_grid_for(cfg, st.time_window())?;

    let k = k_hat_st(&st, &s_grid, &t_grid)?;
    if k.clamped_weights > 0 {
        em.warn(format!("{} clamped edge weights", k.clamped_weights));
    }
    let k1 = k_hat_space(&st, &s_grid)?;
    let k2 = k_hat_time(&st, &t_grid)?;
    let (d, k0) = d_hat_st(&k, &k1, &k2)?;
    let d0 = d0_hat_st(&d, &k0)?;
    let grids = variance_grid(&st, &s_grid, &t_grid, cfg.mc.variance_permutations(), seed)?;
    let floor = default_variance_floor(&k0);
    let residuals = residual_grid(&d, &grids.variance, floor)?;
    let u = u_statistic(&residuals)?;
    if u.excluded_cells > 0 {
        em.warn(format!(
            "{} residual cells excluded by the variance floor",
            u.excluded_cells
        ));
    }

    for (name, grid) in [
        ("d_st.csv", &d),
        ("d0_st.csv", &d0),
        ("k0_st.csv", &k0),
        ("variance_st.csv", &grids.variance),
        ("se_st.csv", &grids.standard_error),
        ("residuals_st.csv", &residuals),
    ] {
        let mut buf = Vec::new();
        table::write_st_grid(&mut buf, grid)?;
        em.emit(name, &buf)?;
    }
    em.emit(
        "d_st.svg",
        svg::st_grid_heatmap(&d, "D(s,t) = K(s,t) - K1(s) K2(t)", "s", "t").as_bytes(),
    )?;
    em.emit(
        "se_grid.svg",
        svg::st_grid_heatmap(&grids.standard_error, "standard error of D(s,t)", "s", "t")
            .as_bytes(),
    )?;
    em.emit(
        "residual_scatter.svg",
        svg::scatter_plot(
            k0.values(),
            residuals.values(),
            "standardized residuals vs K1 K2",
            "K0(s,t)",
            "R(s,t)",
        )
        .as_bytes(),
    )?;
    em.emit(
        "points.svg",
        svg::point_map(st.base(), None, "event locations").as_bytes(),
    )?;
    em.say(format!(
        "st-diagnostics: n = {}, U = {:.6} over {} cells ({} excluded)",
        st.len(),
        u.value,
        u.included_cells,
        u.excluded_cells
    ));
    Ok(())
}

fn st_mc_test_pipeline(cfg: &AnalysisConfig, data: &Ingested, em: &mut Emitter) -> Result<()> {
    let seed = cfg.seed()?;
    let st = st_of(data, cfg.spacetime.class)?;
    let s_grid = s_grid_for(cfg, st.window())?;
    let t_grid = t_grid_for(cfg, st.time_window())?;
    let (mc, gauss) = interaction_tests(
        &st,
        &s_grid,
        &t_grid,
        cfg.mc.m(),
        cfg.mc.variance_permutations(),
        seed,
    )?;
    if mc.excluded_cells > 0 {
        em.warn(format!(
            "{} residual cells excluded by the variance floor",
            mc.excluded_cells
        ));
    }

    let mut report = String::new();
    report.push_str(&format!("u_observed = {}\n", mc.u_observed));
    report.push_str(&format!("m = {}\n", mc.m));
    report.push_str(&format!("rank = {}\n", mc.rank));
    report.push_str(&format!("p = {}\n", mc.p_value));
    report.push_str(&format!("direction = {}\n", mc.direction.as_str()));
    report.push_str(&format!("seed = {}\n", mc.seed));
    report.push_str(&format!("excluded_cells = {}\n", mc.excluded_cells));
    report.push_str(&format!("z = {}\n", gauss.z));
    report.push_str(&format!("p_gaussian_two_sided = {} (approximate)\n", gauss.p_two_sided));
    em.emit("mc_test.txt", report.as_bytes())?;

    let mut buf = String::from("replicate,u\n");
    for (i, u) in mc.replicates.iter().enumerate() {
        buf.push_str(&format!("{},{}\n", i + 2, u));
    }
    em.emit("mc_replicates.csv", buf.as_bytes())?;
    em.emit(
        "mc_hist.svg",
        svg::replicate_histogram(
            &mc.replicates,
            mc.u_observed,
            "null distribution of U",
            "U",
        )
        .as_bytes(),
    )?;
    em.say(format!(
        "st-mc-test: p = {}, {} interaction (u1 = {:.4}, rank {} of {}); gaussian z = {:.3}",
        mc.p_value,
        mc.direction.as_str(),
        mc.u_observed,
        mc.rank,
        mc.m,
        gauss.z
    ));
    Ok(())
}

fn synth_validate(cfg: &AnalysisConfig, em: &mut Emitter) -> Result<()> {
    let mut vcfg = if cfg.validate.quick {
        ValidationConfig::quick()
    } else {
        ValidationConfig::default()
    };
    if let Some(seed) = cfg.seed {
        vcfg.seed = seed;
    }
    let outcomes = run_all(&vcfg);
    let mut buf = String::from("check,passed,observed,criterion\n");
    for o in &outcomes {
        buf.push_str(&format!(
            "{},{},{:?},{:?}\n",
            o.name, o.passed, o.observed, o.criterion
        ));
        em.say(format!(
            "{}: {} ({})",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.observed
        ));
        if !o.passed {
            em.warn(format!("validation check failed: {}", o.name));
        }
    }
    em.emit("validate.csv", buf.as_bytes())?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    em.say(format!(
        "synth-validate: {}/{} checks passed",
        outcomes.len() - failed,
        outcomes.len()
    ));
    Ok(())
}

fn push_estimate_warnings(meta: &stpp_core::secondorder::EstimateMeta, em: &mut Emitter) {
    if meta.clamped_weights > 0 {
        em.warn(format!("{} clamped edge weights", meta.clamped_weights));
    }
    for w in &meta.warnings {
        em.warn(w.clone());
    }
}
