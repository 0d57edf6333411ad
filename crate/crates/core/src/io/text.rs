use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{read_text, write_file};
use crate::error::{Error, Result};
use crate::features::FeatureSeries;
use crate::fitness::FitnessScore;
use crate::nn::TrainReport;
use crate::prognostics::{CycleRecord, RunToFailureUnit, SENSORS, SETTINGS};
use crate::signals::Signal;

const RATE_KEY: &str = "sample_rate_hz=";

/// `sample_rate_hz=<rate>` followed by one sample per line. Values are written
/// in shortest round-trip form, so reading back is bit-exact.
pub fn write_signal_csv(path: &Path, signal: &Signal) -> Result<()> {
    let mut out = String::with_capacity(signal.len() * 22 + 32);
    writeln!(out, "{RATE_KEY}{}", signal.sample_rate_hz()).expect("string write");
    for v in signal.samples() {
        writeln!(out, "{v}").expect("string write");
    }
    write_file(path, out.as_bytes())
}

pub fn read_signal_csv(path: &Path) -> Result<Signal> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::MalformedRow {
        line: 1,
        reason: "empty signal file".into(),
    })?;
    let rate = header
        .trim()
        .strip_prefix(RATE_KEY)
        .and_then(|r| r.trim().parse::<f64>().ok())
        .ok_or_else(|| Error::MalformedRow {
            line: 1,
            reason: format!("expected `{RATE_KEY}<rate>` header"),
        })?;
    let samples = lines
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|_| Error::MalformedRow {
                line: i + 1,
                reason: format!("not a number: {l:?}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Signal::new(samples, rate)
}

const CMAPSS_FIELDS: usize = 2 + SETTINGS + SENSORS;

/// Parses whitespace-separated rows `unit cycle setting*3 sensor*21`, grouped
/// by unit id in ascending order.
pub fn parse_cmapss(text: &str) -> Result<Vec<RunToFailureUnit>> {
    let mut units: BTreeMap<u32, Vec<CycleRecord>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let malformed = |reason: String| Error::MalformedRow { line: line_no, reason };
        if fields.len() != CMAPSS_FIELDS {
            return Err(malformed(format!("{} fields, expected {CMAPSS_FIELDS}", fields.len())));
        }
        let int = |s: &str| s.parse::<u32>().map_err(|_| malformed(format!("bad integer {s:?}")));
        let unit = int(fields[0])?;
        let cycle = int(fields[1])?;
        let nums = fields[2..]
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| malformed(format!("bad number {s:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut settings = [0.0; SETTINGS];
        settings.copy_from_slice(&nums[..SETTINGS]);
        units.entry(unit).or_default().push(CycleRecord {
            cycle,
            settings,
            sensors: nums[SETTINGS..].to_vec(),
        });
    }
    units
        .into_iter()
        .map(|(unit_id, cycles)| {
            let unit = RunToFailureUnit { unit_id, cycles };
            unit.validate()?;
            Ok(unit)
        })
        .collect()
}

pub fn load_cmapss_text(path: &Path) -> Result<Vec<RunToFailureUnit>> {
    parse_cmapss(&read_text(path)?)
}

pub fn write_cmapss_text(path: &Path, units: &[RunToFailureUnit]) -> Result<()> {
    let mut out = String::new();
    for unit in units {
        for c in &unit.cycles {
            write!(out, "{} {}", unit.unit_id, c.cycle).expect("string write");
            for v in c.settings.iter().chain(&c.sensors) {
                write!(out, " {v}").expect("string write");
            }
            out.push('\n');
        }
    }
    write_file(path, out.as_bytes())
}

/// Header plus numeric rows; empty cells read as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

fn fmt_cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

pub fn write_csv_table(path: &Path, table: &CsvTable) -> Result<()> {
    let mut out = table.header.join(",");
    out.push('\n');
    for row in &table.rows {
        out.push_str(&row.iter().map(|&v| fmt_cell(v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

pub fn read_csv_table(path: &Path) -> Result<CsvTable> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or_else(|| Error::MalformedRow {
        line: 1,
        reason: "missing header".into(),
    })?;
    let header: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
    let rows = lines
        .map(|(i, l)| {
            let cells: Vec<&str> = l.split(',').collect();
            if cells.len() != header.len() {
                return Err(Error::MalformedRow {
                    line: i + 1,
                    reason: format!("{} cells under {} columns", cells.len(), header.len()),
                });
            }
            cells
                .iter()
                .map(|c| {
                    let c = c.trim();
                    if c.is_empty() {
                        Ok(f64::NAN)
                    } else {
                        c.parse::<f64>().map_err(|_| Error::MalformedRow {
                            line: i + 1,
                            reason: format!("not a number: {c:?}"),
                        })
                    }
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(CsvTable { header, rows })
}

/// `snapshot_index,<feature name>` with one row per snapshot.
pub fn write_feature_csv(path: &Path, series: &FeatureSeries) -> Result<()> {
    write_csv_table(
        path,
        &CsvTable {
            header: vec!["snapshot_index".into(), series.feature_name.clone()],
            rows: series
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| vec![i as f64, v])
                .collect(),
        },
    )
}

pub fn read_feature_csv(path: &Path) -> Result<FeatureSeries> {
    let table = read_csv_table(path)?;
    if table.header.len() != 2 || table.header[0] != "snapshot_index" {
        return Err(Error::MalformedRow {
            line: 1,
            reason: "expected `snapshot_index,<feature>` header".into(),
        });
    }
    Ok(FeatureSeries::new(
        table.header[1].clone(),
        table.rows.iter().map(|r| r[1]).collect(),
    ))
}

pub fn write_fitness_csv(path: &Path, scores: &[FitnessScore]) -> Result<()> {
    let mut out = String::from("feature,monotonicity,trendability\n");
    for s in scores {
        writeln!(out, "{},{},{}", s.feature_name, s.monotonicity, s.trendability).expect("string write");
    }
    write_file(path, out.as_bytes())
}

/// `epoch,train_loss,val_loss,train_metric,val_metric`; validation cells are
/// empty when no validation split was used.
pub fn write_train_report(path: &Path, report: &TrainReport) -> Result<()> {
    let rows = report
        .epochs
        .iter()
        .map(|e| {
            vec![
                e.epoch as f64,
                e.train_loss,
                e.val_loss.unwrap_or(f64::NAN),
                e.train_metric,
                e.val_metric.unwrap_or(f64::NAN),
            ]
        })
        .collect();
    write_csv_table(
        path,
        &CsvTable {
            header: ["epoch", "train_loss", "val_loss", "train_metric", "val_metric"]
                .map(String::from)
                .to_vec(),
            rows,
        },
    )
}
