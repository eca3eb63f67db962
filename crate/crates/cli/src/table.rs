//! Comparison rows and their text forms.

use serde::Serialize;
use treemap_core::metrics::MetricsReport;
use treemap_core::{Error, Result};

use crate::commands::fmt;

/// Instance name of the per-algorithm mean rows.
pub const MEAN_ROW: &str = "mean";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub instance: String,
    pub algorithm: String,
    pub n: usize,
    #[serde(rename = "Perimeter")]
    pub perimeter: f64,
    #[serde(rename = "maxAR")]
    pub max_ar: f64,
    #[serde(rename = "avgAR")]
    pub avg_ar: f64,
    #[serde(rename = "AWAR")]
    pub awar: f64,
}

impl CompareRow {
    pub fn new(instance: &str, algorithm: &str, n: usize, m: &MetricsReport) -> Self {
        Self {
            instance: instance.to_string(),
            algorithm: algorithm.to_string(),
            n,
            perimeter: m.total_perimeter,
            max_ar: m.max_ar,
            avg_ar: m.avg_ar,
            awar: m.awar,
        }
    }

    /// Column means of `rows`; `n` is the rounded mean cell count.
    pub fn mean<'a>(algorithm: &str, rows: impl Iterator<Item = &'a CompareRow>) -> Self {
        let rows: Vec<_> = rows.collect();
        let k = rows.len().max(1) as f64;
        let avg = |f: fn(&CompareRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / k;
        Self {
            instance: MEAN_ROW.to_string(),
            algorithm: algorithm.to_string(),
            n: avg(|r| r.n as f64).round() as usize,
            perimeter: avg(|r| r.perimeter),
            max_ar: avg(|r| r.max_ar),
            avg_ar: avg(|r| r.avg_ar),
            awar: avg(|r| r.awar),
        }
    }
}

pub fn compare_csv(rows: &[CompareRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Validation(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn compare_markdown(rows: &[CompareRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.instance.clone(),
                r.algorithm.clone(),
                r.n.to_string(),
                fmt(r.perimeter),
                fmt(r.max_ar),
                fmt(r.avg_ar),
                fmt(r.awar),
            ]
        })
        .collect();
    markdown(&["instance", "algorithm", "n", "Perimeter", "maxAR", "avgAR", "AWAR"], &body)
}

/// A GitHub-style table; pipes inside cells are escaped.
pub fn markdown(header: &[&str], rows: &[Vec<String>]) -> String {
    let line = |cells: Vec<String>| format!("| {} |\n", cells.join(" | "));
    let mut out = line(header.iter().map(|h| h.to_string()).collect());
    out += &line(header.iter().map(|_| "---".to_string()).collect());
    for r in rows {
        out += &line(r.iter().map(|c| c.replace('|', "\\|")).collect());
    }
    out
}
