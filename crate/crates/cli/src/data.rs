//! Input table preparation: delimiter handling, calendar-date conversion,
//! and stratification into calendar or unit-offset groups.
//!
//! Calendar dates are converted to whole-day offsets from the configured
//! epoch here, before the table reaches the core ingest; estimators only
//! ever see numeric offsets.

use chrono::{Datelike, NaiveDate};

use stpp_core::error::{Error, Result};
use stpp_core::geometry::{TimeResolution, TimeWindow};

use crate::config::{AnalysisConfig, StratifyBy, TimeKind};

/// One input row, post conversion, with the fields needed for
/// stratification.
#[derive(Debug, Clone)]
pub struct PreparedRow {
    /// CSV line with the time column rewritten to a numeric offset.
    pub line: String,
    pub date: Option<NaiveDate>,
    pub offset: Option<f64>,
}

/// The prepared table plus the resolved time window.
#[derive(Debug, Clone)]
pub struct PreparedTable {
    pub header: String,
    pub rows: Vec<PreparedRow>,
    pub delimiter: u8,
    pub time_window: Option<TimeWindow>,
}

impl PreparedTable {
    /// Assemble a CSV document from a subset of rows.
    pub fn document<'a>(&self, rows: impl Iterator<Item = &'a PreparedRow>) -> String {
        let mut out = String::with_capacity(1024);
        out.push_str(&self.header);
        out.push('\n');
        for row in rows {
            out.push_str(&row.line);
            out.push('\n');
        }
        out
    }

    pub fn full_document(&self) -> String {
        self.document(self.rows.iter())
    }
}

fn parse_iso_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

/// Read and prepare the configured input table.
pub fn prepare_table(cfg: &AnalysisConfig) -> Result<PreparedTable> {
    let input = cfg.input()?;
    let raw = std::fs::read_to_string(&input.path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot read input {}: {e}", input.path.display()),
        ))
    })?;
    let delimiter = cfg.delimiter()?.unwrap_or_else(|| {
        if raw.lines().next().unwrap_or("").contains('\t') {
            b'\t'
        } else {
            b','
        }
    });

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(raw.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Config(format!("cannot read header row: {e}")))?
        .clone();

    let time_idx = match &input.time {
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Config(format!("time column '{name}' not found in header"))
        })?),
        None => None,
    };

    let epoch = match (input.time_kind, time_idx) {
        (TimeKind::IsoDate, Some(_)) => {
            let epoch_str = input.epoch.as_deref().ok_or_else(|| {
                Error::Config("iso-date input needs an epoch (YYYY-MM-DD)".into())
            })?;
            Some(parse_iso_date(epoch_str).ok_or_else(|| {
                Error::Config(format!("cannot parse epoch '{epoch_str}' as YYYY-MM-DD"))
            })?)
        }
        _ => None,
    };

    if input.time_kind == TimeKind::IsoDate {
        if let Some(tw) = &cfg.time_window {
            if tw.resolution != TimeResolution::Day {
                return Err(Error::Config(
                    "iso-date inputs store offsets in days; set time_window.resolution = \"day\""
                        .into(),
                ));
            }
        }
    }

    let write_line = |record: &csv::StringRecord| -> String {
        let mut buf = Vec::new();
        {
            let mut w = csv::WriterBuilder::new()
                .delimiter(delimiter)
                .from_writer(&mut buf);
            w.write_record(record).expect("in-memory write");
            w.flush().expect("in-memory flush");
        }
        String::from_utf8(buf).expect("csv output is UTF-8").trim_end().to_string()
    };

    let mut rows = Vec::new();
    let mut max_offset: f64 = 0.0;
    for record in reader.records() {
        let Ok(record) = record else {
            continue; // malformed line; nothing to carry forward
        };
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let mut date = None;
        let mut offset = None;
        let mut record = record;
        if let Some(ti) = time_idx {
            let field = record.get(ti).unwrap_or("").trim().to_string();
            match input.time_kind {
                TimeKind::IsoDate => {
                    if let (Some(d), Some(e)) = (parse_iso_date(&field), epoch) {
                        let days = (d - e).num_days() as f64;
                        date = Some(d);
                        offset = Some(days);
                        let mut fields: Vec<String> =
                            record.iter().map(|s| s.to_string()).collect();
                        fields[ti] = format!("{days}");
                        record = csv::StringRecord::from(fields);
                    }
                    // Unparseable dates pass through and are rejected
                    // (with accounting) by the ingest.
                }
                TimeKind::Offset => {
                    offset = field.parse::<f64>().ok().filter(|v| v.is_finite());
                }
            }
        }
        if let Some(o) = offset {
            max_offset = max_offset.max(o);
        }
        rows.push(PreparedRow {
            line: write_line(&record),
            date,
            offset,
        });
    }

    let time_window = match (time_idx, &cfg.time_window) {
        (None, _) => None,
        (Some(_), Some(twc)) => {
            let t_max = match twc.t_max {
                Some(t) => t,
                None if input.time_kind == TimeKind::IsoDate => max_offset + 1.0,
                None => {
                    return Err(Error::Config(
                        "time_window.t_max is required for offset time inputs".into(),
                    ))
                }
            };
            Some(TimeWindow::new(t_max, twc.resolution)?)
        }
        (Some(_), None) if input.time_kind == TimeKind::IsoDate => {
            Some(TimeWindow::new(max_offset + 1.0, TimeResolution::Day)?)
        }
        (Some(_), None) => {
            return Err(Error::Config(
                "a [time_window] section is required when a time column is mapped".into(),
            ))
        }
    };

    let header = write_line(&headers);
    Ok(PreparedTable {
        header,
        rows,
        delimiter,
        time_window,
    })
}

/// One stratum: label plus the indices of its rows.
#[derive(Debug, Clone)]
pub struct Stratum {
    pub label: String,
    pub row_indices: Vec<usize>,
}

/// Partition rows by calendar unit (ISO dates) or by unit multiples of
/// the declared resolution (numeric offsets). Rows without a usable time
/// are reported back for the manifest.
pub fn stratify_rows(
    table: &PreparedTable,
    by: StratifyBy,
    time_kind: TimeKind,
) -> Result<(Vec<Stratum>, usize)> {
    let mut groups: std::collections::BTreeMap<String, Vec<usize>> =
        std::collections::BTreeMap::new();
    let mut unassigned = 0usize;

    let resolution = table
        .time_window
        .as_ref()
        .map(|tw| tw.resolution())
        .ok_or_else(|| Error::Config("stratification needs time data".into()))?;

    for (i, row) in table.rows.iter().enumerate() {
        let label = match time_kind {
            TimeKind::IsoDate => row.date.map(|d| match by {
                StratifyBy::Year => format!("{:04}", d.year()),
                StratifyBy::Month => format!("{:04}-{:02}", d.year(), d.month()),
                StratifyBy::Week => {
                    let w = d.iso_week();
                    format!("{:04}-W{:02}", w.year(), w.week())
                }
            }),
            TimeKind::Offset => match row.offset {
                Some(o) => {
                    let unit_days = match by {
                        StratifyBy::Year => TimeResolution::Year.days().unwrap(),
                        StratifyBy::Month => TimeResolution::Month.days().unwrap(),
                        StratifyBy::Week => TimeResolution::Week.days().unwrap(),
                    };
                    let res_days = resolution.days().ok_or_else(|| {
                        Error::Config(
                            "cannot stratify abstract time units by calendar periods".into(),
                        )
                    })?;
                    let unit = unit_days / res_days;
                    let k = (o / unit).floor() as i64;
                    let tag = match by {
                        StratifyBy::Year => "year",
                        StratifyBy::Month => "month",
                        StratifyBy::Week => "week",
                    };
                    Some(format!("{tag}-{k}"))
                }
                None => None,
            },
        };
        match label {
            Some(l) => groups.entry(l).or_default().push(i),
            None => unassigned += 1,
        }
    }

    let strata = groups
        .into_iter()
        .map(|(label, row_indices)| Stratum { label, row_indices })
        .collect();
    Ok((strata, unassigned))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso_config(dir: &std::path::Path, body: &str) -> AnalysisConfig {
        let data_path = dir.join("events.csv");
        std::fs::write(&data_path, body).unwrap();
        let toml_text = format!(
            r#"
seed = 1
[input]
path = "{}"
x = "x"
y = "y"
time = "date"
time_kind = "iso-date"
epoch = "2007-01-01"
[window]
shape = "rectangle"
x_min = 0.0
y_min = 0.0
x_max = 1.0
y_max = 1.0
"#,
            data_path.display()
        );
        toml::from_str(&toml_text).unwrap()
    }

    #[test]
    fn iso_dates_become_day_offsets() {
        let dir = std::env::temp_dir().join("stpp-data-test");
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = iso_config(
            &dir,
            "x,y,date\n0.1,0.2,2007-01-01\n0.3,0.4,2007-01-11\n0.5,0.5,2008-01-01\n",
        );
        let table = prepare_table(&cfg).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.rows[0].offset, Some(0.0));
        assert_eq!(table.rows[1].offset, Some(10.0));
        assert_eq!(table.rows[2].offset, Some(365.0));
        let tw = table.time_window.unwrap();
        assert_eq!(tw.length(), 366.0);
        assert!(table.rows[1].line.contains("10"));

        let (strata, unassigned) = stratify_rows(&table, StratifyBy::Year, TimeKind::IsoDate).unwrap();
        assert_eq!(unassigned, 0);
        assert_eq!(strata.len(), 2);
        assert_eq!(strata[0].label, "2007");
        assert_eq!(strata[0].row_indices, vec![0, 1]);
        assert_eq!(strata[1].label, "2008");
    }

    #[test]
    fn unparseable_dates_pass_through_unassigned() {
        let dir = std::env::temp_dir().join("stpp-data-test2");
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = iso_config(&dir, "x,y,date\n0.1,0.2,2007-01-05\n0.3,0.4,not-a-date\n");
        let table = prepare_table(&cfg).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[1].offset, None);
        let (strata, unassigned) = stratify_rows(&table, StratifyBy::Month, TimeKind::IsoDate).unwrap();
        assert_eq!(unassigned, 1);
        assert_eq!(strata.len(), 1);
        assert_eq!(strata[0].label, "2007-01");
    }
}
