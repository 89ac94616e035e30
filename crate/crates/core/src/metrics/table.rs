//! Per-system metric tables, external score ingestion and correlation analysis.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::Serialize;

use crate::embeddings::csv_error;
use crate::error::{Error, Result};

/// Evaluation metrics of the anonymized data, in Table II row order.
pub const SA_METRICS: [&str; 6] = ["EER", "WER", "GVD", "UTMOS", "SA-NAT", "SA-SIM"];
/// Evaluation metrics of the downstream TTS model.
pub const TTS_METRICS: [&str; 2] = ["TTS-NAT", "TTS-SIM"];

#[derive(Debug, Clone, PartialEq)]
pub struct SystemRow {
    pub system: String,
    pub values: Vec<Option<f64>>,
}

/// Named metric columns per system; cells may be missing.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMetricsTable {
    pub columns: Vec<String>,
    pub rows: Vec<SystemRow>,
}

impl SystemMetricsTable {
    pub fn new(columns: Vec<String>, rows: Vec<SystemRow>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.as_str()) {
                return Err(Error::Validation(format!("duplicate metric column '{c}'")));
            }
        }
        for r in &rows {
            if r.values.len() != columns.len() {
                return Err(Error::Validation(format!(
                    "system '{}' has {} values for {} columns",
                    r.system,
                    r.values.len(),
                    columns.len()
                )));
            }
        }
        Ok(Self { columns, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let k = self
            .column_index(name)
            .ok_or_else(|| Error::Validation(format!("unknown metric column '{name}'")))?;
        Ok(self.rows.iter().map(|r| r.values[k]).collect())
    }
}

fn parse_cell(cell: &str) -> std::result::Result<Option<f64>, ()> {
    let c = cell.trim();
    if c.is_empty() {
        return Ok(None);
    }
    match c {
        "-inf" => Ok(Some(f64::NEG_INFINITY)),
        _ => c.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some).ok_or(()),
    }
}

/// Reads a per-system CSV with header `system,<metric>,...`; empty cells are missing.
pub fn load_system_table(path: impl AsRef<Path>) -> Result<SystemMetricsTable> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.get(0).map(str::trim) != Some("system") {
        return Err(Error::Schema(format!("{}: first column must be 'system'", path.display())));
    }
    let columns: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let row = i + 2;
        let values = rec
            .iter()
            .skip(1)
            .zip(&columns)
            .map(|(cell, col)| {
                parse_cell(cell).map_err(|_| {
                    Error::Validation(format!(
                        "{}: row {row}, column '{col}': '{cell}' is not a number",
                        path.display()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(SystemRow {
            system: rec[0].trim().to_string(),
            values,
        });
    }
    SystemMetricsTable::new(columns, rows)
}

pub fn write_system_table(table: &SystemMetricsTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec!["system".to_string()];
    header.extend(table.columns.iter().cloned());
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for r in &table.rows {
        let mut rec = vec![r.system.clone()];
        rec.extend(r.values.iter().map(|v| match v {
            None => String::new(),
            Some(x) if *x == f64::NEG_INFINITY => "-inf".to_string(),
            Some(x) => x.to_string(),
        }));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceScore {
    pub system: String,
    pub utt_id: String,
    pub metric: String,
    pub value: f64,
}

/// Reads a per-utterance CSV with header `system,utt_id,metric,value`. When
/// `known_utts` is given, every utt_id must be in it.
pub fn load_utterance_scores(path: impl AsRef<Path>, known_utts: Option<&HashSet<String>>) -> Result<Vec<UtteranceScore>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["system", "utt_id", "metric", "value"] {
        return Err(Error::Schema(format!(
            "{}: expected header 'system,utt_id,metric,value'",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let row = i + 2;
        let utt_id = rec[1].trim().to_string();
        if let Some(known) = known_utts {
            if !known.contains(&utt_id) {
                return Err(Error::Validation(format!(
                    "{}: row {row}: unknown utt_id '{utt_id}'",
                    path.display()
                )));
            }
        }
        let value = match parse_cell(&rec[3]) {
            Ok(Some(v)) if v.is_finite() => v,
            _ => {
                return Err(Error::Validation(format!(
                    "{}: row {row}: value '{}' is not a finite number",
                    path.display(),
                    &rec[3]
                )))
            }
        };
        out.push(UtteranceScore {
            system: rec[0].trim().to_string(),
            utt_id,
            metric: rec[2].trim().to_string(),
            value,
        });
    }
    Ok(out)
}

/// Per-system means of per-utterance scores; systems and metrics sorted by name.
pub fn aggregate_scores(scores: &[UtteranceScore]) -> Result<SystemMetricsTable> {
    let mut acc: BTreeMap<&str, BTreeMap<&str, (f64, usize)>> = BTreeMap::new();
    let mut metrics = std::collections::BTreeSet::new();
    for s in scores {
        let e = acc.entry(&s.system).or_default().entry(&s.metric).or_insert((0.0, 0));
        e.0 += s.value;
        e.1 += 1;
        metrics.insert(s.metric.as_str());
    }
    let columns: Vec<String> = metrics.iter().map(|m| m.to_string()).collect();
    let rows = acc
        .into_iter()
        .map(|(system, per)| SystemRow {
            system: system.to_string(),
            values: metrics
                .iter()
                .map(|m| per.get(m).map(|(sum, n)| sum / *n as f64))
                .collect(),
        })
        .collect();
    SystemMetricsTable::new(columns, rows)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Precondition(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Precondition("correlation needs at least 2 points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant sequence".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub system: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCorrelation {
    pub x: String,
    pub y: String,
    pub r: f64,
    pub n: usize,
    #[serde(skip)]
    pub points: Vec<ScatterPoint>,
}

/// Every SA metric against every TTS metric, in Table II order.
pub fn default_pairs() -> Vec<(String, String)> {
    SA_METRICS
        .iter()
        .flat_map(|s| TTS_METRICS.iter().map(move |t| (s.to_string(), t.to_string())))
        .collect()
}

/// Pearson per column pair over the rows where both cells are present and
/// finite; `-inf` cells are dropped with a warning.
pub fn correlate_table(table: &SystemMetricsTable, pairs: &[(String, String)]) -> Result<Vec<PairCorrelation>> {
    pairs
        .iter()
        .map(|(xc, yc)| {
            let xs = table.column(xc)?;
            let ys = table.column(yc)?;
            let mut points = Vec::new();
            for ((row, x), y) in table.rows.iter().zip(xs).zip(ys) {
                match (x, y) {
                    (Some(x), Some(y)) if x.is_finite() && y.is_finite() => points.push(ScatterPoint {
                        system: row.system.clone(),
                        x,
                        y,
                    }),
                    (Some(_), Some(_)) => log::warn!(
                        "system '{}': non-finite value excluded from {xc} vs {yc}",
                        row.system
                    ),
                    _ => {}
                }
            }
            if points.len() < 2 {
                return Err(Error::Validation(format!(
                    "{xc} vs {yc}: need at least 2 systems with both values, found {}",
                    points.len()
                )));
            }
            let x: Vec<f64> = points.iter().map(|p| p.x).collect();
            let y: Vec<f64> = points.iter().map(|p| p.y).collect();
            let r = pearson(&x, &y).map_err(|e| match e {
                Error::UndefinedCorrelation(m) => Error::UndefinedCorrelation(format!("{xc} vs {yc}: {m}")),
                other => other,
            })?;
            Ok(PairCorrelation {
                x: xc.clone(),
                y: yc.clone(),
                r,
                n: points.len(),
                points,
            })
        })
        .collect()
}

/// Writes `system,<x>,<y>` rows for one pair.
pub fn write_scatter(pair: &PairCorrelation, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["system", pair.x.as_str(), pair.y.as_str()])
        .map_err(|e| csv_error(path, e))?;
    for p in &pair.points {
        w.write_record([p.system.clone(), p.x.to_string(), p.y.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
