//! Point patterns, case/control marks, event times, and ingestion.
//!
//! Patterns are immutable after construction and validate their invariants
//! up front: every point lies in the (closed) window, mark and time vectors
//! match the point count, and all times fall inside `[0, T]`. Duplicate
//! coordinates are legitimate data (co-located events) and are retained;
//! ingestion surfaces a duplicate count for the analyst.

use std::collections::HashMap;
use std::io::Read;

use crate::error::{Error, Result};
use crate::geometry::{Point, StudyWindow, TimeResolution, TimeWindow};

/// Case/control label of a marked event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mark {
    Case,
    Control,
}

/// A set of event locations inside a study window.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    points: Vec<Point>,
    window: StudyWindow,
}

impl PointPattern {
    /// Build a pattern, rejecting points outside the closed window.
    pub fn new(points: Vec<Point>, window: StudyWindow) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::Domain(format!("point {i} has non-finite coordinates")));
            }
            if !window.contains(*p) {
                return Err(Error::Domain(format!(
                    "point {i} at ({}, {}) outside study window",
                    p.x, p.y
                )));
            }
        }
        Ok(PointPattern { points, window })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn window(&self) -> &StudyWindow {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A point pattern with binary case/control marks.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPattern {
    base: PointPattern,
    marks: Vec<Mark>,
}

impl MarkedPattern {
    pub fn new(base: PointPattern, marks: Vec<Mark>) -> Result<Self> {
        if marks.len() != base.len() {
            return Err(Error::Config(format!(
                "marks length {} does not match point count {}",
                marks.len(),
                base.len()
            )));
        }
        Ok(MarkedPattern { base, marks })
    }

    pub fn base(&self) -> &PointPattern {
        &self.base
    }

    pub fn marks(&self) -> &[Mark] {
        &self.marks
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn count(&self, mark: Mark) -> usize {
        self.marks.iter().filter(|&&m| m == mark).count()
    }
}

/// A point pattern with per-event times inside a time window.
#[derive(Debug, Clone, PartialEq)]
pub struct STPattern {
    base: PointPattern,
    times: Vec<f64>,
    time_window: TimeWindow,
}

impl STPattern {
    pub fn new(base: PointPattern, times: Vec<f64>, time_window: TimeWindow) -> Result<Self> {
        if times.len() != base.len() {
            return Err(Error::Config(format!(
                "times length {} does not match point count {}",
                times.len(),
                base.len()
            )));
        }
        for (i, t) in times.iter().enumerate() {
            if !t.is_finite() || !time_window.contains(*t) {
                return Err(Error::Domain(format!(
                    "event {i} time {t} outside [0, {}]",
                    time_window.length()
                )));
            }
        }
        Ok(STPattern {
            base,
            times,
            time_window,
        })
    }

    pub fn base(&self) -> &PointPattern {
        &self.base
    }

    pub fn points(&self) -> &[Point] {
        self.base.points()
    }

    pub fn window(&self) -> &StudyWindow {
        self.base.window()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time_window(&self) -> &TimeWindow {
        &self.time_window
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// Same locations with a replaced time vector (used by permutation
    /// nulls; the multiset of times must be preserved by the caller).
    pub fn with_times(&self, times: Vec<f64>) -> Result<Self> {
        STPattern::new(self.base.clone(), times, self.time_window)
    }
}

/// Why an input row was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    /// Location outside the study window or time outside `[0, T]`.
    OutOfWindow,
    /// Field present but not interpretable (bad number, unknown label).
    Unparseable,
    /// A mapped column has an empty value in this row.
    MissingField,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::OutOfWindow => "out-of-window",
            RejectReason::Unparseable => "unparseable",
            RejectReason::MissingField => "missing-field",
        }
    }
}

/// Full accounting of one ingest run: every input row is either accepted
/// or rejected with a reason.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_accepted: usize,
    pub rejected_out_of_window: usize,
    pub rejected_unparseable: usize,
    pub rejected_missing_field: usize,
    /// Accepted rows minus distinct (x, y, t, mark) tuples.
    pub duplicate_count: usize,
}

impl IngestReport {
    pub fn rows_rejected(&self) -> usize {
        self.rejected_out_of_window + self.rejected_unparseable + self.rejected_missing_field
    }
}

/// Column mapping for delimited event tables.
#[derive(Debug, Clone)]
pub struct IngestSchema {
    pub x_column: String,
    pub y_column: String,
    /// Numeric time offsets in the time window's resolution unit.
    pub time_column: Option<String>,
    pub label: Option<LabelColumns>,
    /// Field delimiter; when `None` the header line is sniffed for a tab,
    /// falling back to comma.
    pub delimiter: Option<u8>,
}

/// Label column plus the two string values mapped to case/control.
#[derive(Debug, Clone)]
pub struct LabelColumns {
    pub column: String,
    pub case_value: String,
    pub control_value: String,
}

/// Product of an ingest: the accepted pattern plus optional marks/times,
/// convertible into the concrete pattern types.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub pattern: PointPattern,
    pub marks: Option<Vec<Mark>>,
    pub times: Option<Vec<f64>>,
    pub time_window: Option<TimeWindow>,
    pub report: IngestReport,
}

impl Ingested {
    pub fn into_marked(self) -> Result<MarkedPattern> {
        let marks = self
            .marks
            .ok_or_else(|| Error::Config("ingest had no label column mapped".into()))?;
        MarkedPattern::new(self.pattern, marks)
    }

    pub fn into_st(self) -> Result<STPattern> {
        let times = self
            .times
            .ok_or_else(|| Error::Config("ingest had no time column mapped".into()))?;
        let tw = self
            .time_window
            .ok_or_else(|| Error::Config("ingest had no time window".into()))?;
        STPattern::new(self.pattern, times, tw)
    }
}

/// Read a delimited event table (one event per row, header row with the
/// mapped column names) and keep the in-window rows.
///
/// Every input row is accounted for in the report; duplicates are retained
/// and counted. Zero accepted rows is an error, as is a schema that names
/// columns absent from the header.
pub fn ingest<R: Read>(
    reader: R,
    schema: &IngestSchema,
    window: &StudyWindow,
    time_window: Option<&TimeWindow>,
) -> Result<Ingested> {
    if schema.time_column.is_some() && time_window.is_none() {
        return Err(Error::Config(
            "schema maps a time column but no time window was given".into(),
        ));
    }

    let mut raw = String::new();
    let mut rdr = reader;
    rdr.read_to_string(&mut raw)?;

    let delimiter = schema.delimiter.unwrap_or_else(|| {
        let header = raw.lines().next().unwrap_or("");
        if header.contains('\t') {
            b'\t'
        } else {
            b','
        }
    });

    let mut csv_reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(raw.as_bytes());

    let headers = csv_reader
        .headers()
        .map_err(|e| Error::Config(format!("cannot read header row: {e}")))?
        .clone();
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("column '{name}' not found in header")))
    };

    let xi = column(&schema.x_column)?;
    let yi = column(&schema.y_column)?;
    let ti = schema.time_column.as_deref().map(column).transpose()?;
    let li = schema
        .label
        .as_ref()
        .map(|l| column(&l.column))
        .transpose()?;

    let mut points = Vec::new();
    let mut marks = Vec::new();
    let mut times = Vec::new();
    let mut report = IngestReport::default();
    let mut seen: HashMap<(u64, u64, u64, u8), usize> = HashMap::new();

    for record in csv_reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(_) => {
                report.rows_read += 1;
                report.rejected_unparseable += 1;
                continue;
            }
        };
        // Skip blank trailing lines without counting them as rows.
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        report.rows_read += 1;

        let field = |idx: usize| record.get(idx).map(str::trim);

        let (Some(xs), Some(ys)) = (field(xi), field(yi)) else {
            report.rejected_missing_field += 1;
            continue;
        };
        if xs.is_empty() || ys.is_empty() {
            report.rejected_missing_field += 1;
            continue;
        }
        let (Ok(x), Ok(y)) = (xs.parse::<f64>(), ys.parse::<f64>()) else {
            report.rejected_unparseable += 1;
            continue;
        };
        if !x.is_finite() || !y.is_finite() {
            report.rejected_unparseable += 1;
            continue;
        }

        let mut t_val: Option<f64> = None;
        if let Some(tcol) = ti {
            let Some(ts) = field(tcol) else {
                report.rejected_missing_field += 1;
                continue;
            };
            if ts.is_empty() {
                report.rejected_missing_field += 1;
                continue;
            }
            let Ok(t) = ts.parse::<f64>() else {
                report.rejected_unparseable += 1;
                continue;
            };
            t_val = Some(t);
        }

        let mut mark: Option<Mark> = None;
        if let (Some(lcol), Some(lmap)) = (li, schema.label.as_ref()) {
            let Some(ls) = field(lcol) else {
                report.rejected_missing_field += 1;
                continue;
            };
            if ls.is_empty() {
                report.rejected_missing_field += 1;
                continue;
            }
            mark = if ls == lmap.case_value {
                Some(Mark::Case)
            } else if ls == lmap.control_value {
                Some(Mark::Control)
            } else {
                report.rejected_unparseable += 1;
                continue;
            };
        }

        let p = Point::new(x, y);
        if !window.contains(p) {
            report.rejected_out_of_window += 1;
            continue;
        }
        if let (Some(t), Some(tw)) = (t_val, time_window) {
            if !t.is_finite() || !tw.contains(t) {
                report.rejected_out_of_window += 1;
                continue;
            }
        }

        report.rows_accepted += 1;
        let key = (
            x.to_bits(),
            y.to_bits(),
            t_val.unwrap_or(0.0).to_bits(),
            match mark {
                Some(Mark::Case) => 1,
                Some(Mark::Control) => 2,
                None => 0,
            },
        );
        *seen.entry(key).or_insert(0) += 1;
        points.push(p);
        if let Some(m) = mark {
            marks.push(m);
        }
        if let Some(t) = t_val {
            times.push(t);
        }
    }

    debug_assert_eq!(report.rows_read, report.rows_accepted + report.rows_rejected());

    if report.rows_accepted == 0 {
        return Err(Error::EmptyPattern(format!(
            "no rows accepted ({} read, {} rejected)",
            report.rows_read,
            report.rows_rejected()
        )));
    }
    report.duplicate_count = report.rows_accepted - seen.len();

    let pattern = PointPattern::new(points, window.clone())?;
    Ok(Ingested {
        pattern,
        marks: schema.label.as_ref().map(|_| marks),
        times: ti.map(|_| times),
        time_window: time_window.copied(),
        report,
    })
}

/// Split a marked pattern into its case and control patterns, preserving
/// the parent window.
pub fn split_marks(pattern: &MarkedPattern) -> Result<(PointPattern, PointPattern)> {
    let n_case = pattern.count(Mark::Case);
    let n_control = pattern.len() - n_case;
    if n_case == 0 || n_control == 0 {
        return Err(Error::InsufficientData(format!(
            "need at least one case and one control, got {n_case} cases / {n_control} controls"
        )));
    }
    let mut cases = Vec::with_capacity(n_case);
    let mut controls = Vec::with_capacity(n_control);
    for (p, m) in pattern.base().points().iter().zip(pattern.marks()) {
        match m {
            Mark::Case => cases.push(*p),
            Mark::Control => controls.push(*p),
        }
    }
    let window = pattern.base().window().clone();
    Ok((
        PointPattern::new(cases, window.clone())?,
        PointPattern::new(controls, window)?,
    ))
}

/// Frequency histogram of event times in fixed-width bins covering `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalHistogram {
    /// Width of one bin in the pattern's resolution unit.
    pub bin_width: f64,
    /// Count per bin; bin `k` covers `[k*w, (k+1)*w)`, the last bin is
    /// closed at `T`.
    pub counts: Vec<u64>,
    pub warning: Option<String>,
}

impl TemporalHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Histogram of event counts per `bin` (year/month/week/day), expressed in
/// the pattern's declared time resolution.
///
/// A bin coarser than the whole window yields a single-bin histogram with
/// a warning. Abstract-resolution patterns bin in unit steps.
pub fn temporal_histogram(pattern: &STPattern, bin: TimeResolution) -> Result<TemporalHistogram> {
    let resolution = pattern.time_window().resolution();
    let bin_width = match (bin.days(), resolution.days()) {
        (Some(bin_days), Some(res_days)) => bin_days / res_days,
        (None, None) => 1.0,
        _ => {
            return Err(Error::Config(format!(
                "histogram bin {bin:?} incompatible with pattern resolution {resolution:?}"
            )))
        }
    };

    let t_max = pattern.time_window().length();
    if pattern.is_empty() {
        return Ok(TemporalHistogram {
            bin_width,
            counts: Vec::new(),
            warning: None,
        });
    }
    let (bin_width, warning) = if bin_width > t_max {
        (
            t_max,
            Some(format!(
                "bin width {bin_width} exceeds window length {t_max}; single bin used"
            )),
        )
    } else {
        (bin_width, None)
    };

    let n_bins = (t_max / bin_width).ceil().max(1.0) as usize;
    let mut counts = vec![0u64; n_bins];
    for &t in pattern.times() {
        let mut k = (t / bin_width).floor() as usize;
        if k >= n_bins {
            k = n_bins - 1; // t == T lands in the last bin
        }
        counts[k] += 1;
    }
    Ok(TemporalHistogram {
        bin_width,
        counts,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema_xy() -> IngestSchema {
        IngestSchema {
            x_column: "x".into(),
            y_column: "y".into(),
            time_column: None,
            label: None,
            delimiter: None,
        }
    }

    #[test]
    fn ingest_rejects_out_of_window_rows() {
        let data = "x,y\n0.1,0.2\n0.5,0.5\n0.9,0.9\n1.5,0.5\n";
        let out = ingest(
            data.as_bytes(),
            &schema_xy(),
            &StudyWindow::unit_square(),
            None,
        )
        .unwrap();
        assert_eq!(out.pattern.len(), 3);
        assert_eq!(out.report.rows_read, 4);
        assert_eq!(out.report.rows_accepted, 3);
        assert_eq!(out.report.rejected_out_of_window, 1);
        assert_eq!(out.report.duplicate_count, 0);
    }

    #[test]
    fn ingest_missing_time_column_is_config_error() {
        let data = "x,y\n0.1,0.2\n";
        let mut schema = schema_xy();
        schema.time_column = Some("t".into());
        let tw = TimeWindow::new(10.0, TimeResolution::Abstract).unwrap();
        let err = ingest(
            data.as_bytes(),
            &schema,
            &StudyWindow::unit_square(),
            Some(&tw),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn ingest_retains_and_counts_duplicates() {
        let data = "x,y\n0.25,0.25\n0.25,0.25\n";
        let out = ingest(
            data.as_bytes(),
            &schema_xy(),
            &StudyWindow::unit_square(),
            None,
        )
        .unwrap();
        assert_eq!(out.pattern.len(), 2);
        assert_eq!(out.report.duplicate_count, 1);
    }

    #[test]
    fn ingest_zero_accepted_rows_is_error() {
        let data = "x,y\n5.0,5.0\n";
        let err = ingest(
            data.as_bytes(),
            &schema_xy(),
            &StudyWindow::unit_square(),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyPattern(_)));
    }

    #[test]
    fn ingest_tab_delimited_sniffing() {
        let data = "x\ty\tkind\n0.1\t0.2\tfire\n0.3\t0.4\tbase\n";
        let mut schema = schema_xy();
        schema.label = Some(LabelColumns {
            column: "kind".into(),
            case_value: "fire".into(),
            control_value: "base".into(),
        });
        let out = ingest(
            data.as_bytes(),
            &schema,
            &StudyWindow::unit_square(),
            None,
        )
        .unwrap();
        let marked = out.into_marked().unwrap();
        assert_eq!(marked.count(Mark::Case), 1);
        assert_eq!(marked.count(Mark::Control), 1);
    }

    #[test]
    fn ingest_counts_unparseable_and_missing() {
        let data = "x,y\nnot-a-number,0.2\n0.3,\n0.4,0.4\n";
        let out = ingest(
            data.as_bytes(),
            &schema_xy(),
            &StudyWindow::unit_square(),
            None,
        )
        .unwrap();
        assert_eq!(out.report.rejected_unparseable, 1);
        assert_eq!(out.report.rejected_missing_field, 1);
        assert_eq!(out.report.rows_accepted, 1);
        assert_eq!(
            out.report.rows_read,
            out.report.rows_accepted + out.report.rows_rejected()
        );
    }

    #[test]
    fn boundary_points_are_accepted() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.5)];
        let p = PointPattern::new(pts, StudyWindow::unit_square()).unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn split_marks_partitions_points() {
        let base = PointPattern::new(
            (0..10)
                .map(|i| Point::new(0.05 + 0.09 * i as f64, 0.5))
                .collect(),
            StudyWindow::unit_square(),
        )
        .unwrap();
        let marks: Vec<Mark> = (0..10)
            .map(|i| if i < 4 { Mark::Case } else { Mark::Control })
            .collect();
        let marked = MarkedPattern::new(base, marks).unwrap();
        let (cases, controls) = split_marks(&marked).unwrap();
        assert_eq!(cases.len(), 4);
        assert_eq!(controls.len(), 6);
        assert_eq!(cases.len() + controls.len(), marked.len());
        assert_eq!(cases.window(), marked.base().window());
    }

    #[test]
    fn split_marks_single_class_is_error() {
        let base = PointPattern::new(
            vec![Point::new(0.1, 0.1), Point::new(0.2, 0.2)],
            StudyWindow::unit_square(),
        )
        .unwrap();
        let marked = MarkedPattern::new(base, vec![Mark::Case, Mark::Case]).unwrap();
        assert!(matches!(
            split_marks(&marked),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn histogram_single_bin_and_empty() {
        let window = StudyWindow::unit_square();
        let tw = TimeWindow::new(12.0, TimeResolution::Month).unwrap();
        let base = PointPattern::new(
            vec![Point::new(0.5, 0.5); 5],
            window.clone(),
        )
        .unwrap();
        let st = STPattern::new(base, vec![0.1, 0.2, 0.3, 0.5, 0.9], tw).unwrap();
        let h = temporal_histogram(&st, TimeResolution::Month).unwrap();
        assert_eq!(h.counts[0], 5);
        assert_eq!(h.total(), 5);

        let empty = STPattern::new(
            PointPattern::new(vec![], window).unwrap(),
            vec![],
            tw,
        )
        .unwrap();
        let h = temporal_histogram(&empty, TimeResolution::Month).unwrap();
        assert!(h.counts.is_empty());
    }

    #[test]
    fn histogram_bin_wider_than_window_warns() {
        let tw = TimeWindow::new(5.0, TimeResolution::Day).unwrap();
        let base = PointPattern::new(vec![Point::new(0.5, 0.5)], StudyWindow::unit_square()).unwrap();
        let st = STPattern::new(base, vec![2.5], tw).unwrap();
        let h = temporal_histogram(&st, TimeResolution::Year).unwrap();
        assert_eq!(h.counts.len(), 1);
        assert!(h.warning.is_some());
    }

    #[test]
    fn histogram_counts_sum_and_order_invariance() {
        let tw = TimeWindow::new(12.0, TimeResolution::Month).unwrap();
        let times: Vec<f64> = (0..48).map(|i| (i as f64 * 0.249) % 12.0).collect();
        let base = PointPattern::new(
            vec![Point::new(0.5, 0.5); times.len()],
            StudyWindow::unit_square(),
        )
        .unwrap();
        let st = STPattern::new(base.clone(), times.clone(), tw).unwrap();
        let h1 = temporal_histogram(&st, TimeResolution::Month).unwrap();
        assert_eq!(h1.total() as usize, times.len());
        assert_eq!(h1.counts.len(), 12);

        let mut rev = times;
        rev.reverse();
        let st2 = STPattern::new(base, rev, tw).unwrap();
        let h2 = temporal_histogram(&st2, TimeResolution::Month).unwrap();
        assert_eq!(h1.counts, h2.counts);
    }
}
