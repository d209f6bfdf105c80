//! Merging result CSVs and summarising their numeric columns.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnStats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub inputs: Vec<PathBuf>,
    pub rows: usize,
    /// Statistics per `scheme` value (or `all` without that column), then
    /// per numeric column.
    pub groups: BTreeMap<String, BTreeMap<String, ColumnStats>>,
}

/// Concatenates CSVs that share a header. Returns the merged bytes and a
/// summary of the numeric columns.
pub fn merge(inputs: &[PathBuf]) -> Result<(Vec<u8>, Report)> {
    if inputs.is_empty() {
        bail!("report needs at least one CSV");
    }
    let mut header: Option<csv::StringRecord> = None;
    let mut records = Vec::new();
    for path in inputs {
        let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        let h = r.headers()?.clone();
        match &header {
            None => header = Some(h),
            Some(first) if *first != h => bail!("{} has a different header", path.display()),
            _ => {}
        }
        for rec in r.records() {
            records.push(rec?);
        }
    }
    let header = header.expect("at least one input");

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for rec in &records {
        w.write_record(rec)?;
    }
    let merged = w.into_inner().map_err(|e| e.into_error())?;

    let scheme_col = header.iter().position(|h| h == "scheme");
    let mut sums: BTreeMap<String, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for rec in &records {
        let group = scheme_col.and_then(|i| rec.get(i)).unwrap_or("all").to_string();
        for (name, value) in header.iter().zip(rec.iter()) {
            if name == "seed" || name == "config_hash" {
                continue;
            }
            if let Ok(x) = value.parse::<f64>() {
                sums.entry(group.clone()).or_default().entry(name.to_string()).or_default().push(x);
            }
        }
    }
    let groups = sums
        .into_iter()
        .map(|(g, cols)| {
            let stats = cols
                .into_iter()
                .map(|(c, xs)| {
                    let n = xs.len();
                    let mean = xs.iter().sum::<f64>() / n as f64;
                    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    (c, ColumnStats { count: n, mean, min, max })
                })
                .collect();
            (g, stats)
        })
        .collect();
    Ok((merged, Report { inputs: inputs.to_vec(), rows: records.len(), groups }))
}
