//! Report envelope and the three output renderings.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub engine_version: &'static str,
    pub seed: Option<u64>,
    pub truncation_k: usize,
    pub grid_step: f64,
    pub threads: usize,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub status: &'static str,
    pub result: Value,
    pub provenance: Provenance,
    pub elapsed_ms: f64,
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn rows(result: &Value) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let arr = result.get("rows")?.as_array()?;
    let first = arr.first()?.as_object()?;
    let header: Vec<String> = first.keys().cloned().collect();
    let body = arr
        .iter()
        .map(|r| header.iter().map(|k| scalar(r.get(k).unwrap_or(&Value::Null))).collect())
        .collect();
    Some((header, body))
}

fn scalars(result: &Value) -> Vec<(String, String)> {
    let empty = Map::new();
    result
        .as_object()
        .unwrap_or(&empty)
        .iter()
        .filter(|(k, _)| k.as_str() != "rows")
        .map(|(k, v)| (k.clone(), scalar(v)))
        .collect()
}

fn render_table(report: &Report) -> String {
    let mut out = String::new();
    writeln!(out, "lfold {}  [{}]", report.command, report.status).unwrap();
    let fields = scalars(&report.result);
    let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in &fields {
        writeln!(out, "  {k:<width$}  {v}").unwrap();
    }
    if let Some((header, body)) = rows(&report.result) {
        let widths: Vec<usize> = (0..header.len())
            .map(|i| body.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap())
            .collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        writeln!(out, "  {}", line(&header)).unwrap();
        for r in &body {
            writeln!(out, "  {}", line(r)).unwrap();
        }
    }
    let p = &report.provenance;
    writeln!(
        out,
        "# lfold {} engine {} | K={} h={} seed={} threads={} | {:.1} ms",
        p.version,
        p.engine_version,
        p.truncation_k,
        p.grid_step,
        p.seed.map_or("-".into(), |s| s.to_string()),
        p.threads,
        report.elapsed_ms
    )
    .unwrap();
    out
}

fn render_csv(report: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    match rows(&report.result) {
        Some((header, body)) => {
            w.write_record(&header).unwrap();
            for r in body {
                w.write_record(&r).unwrap();
            }
        }
        None => {
            w.write_record(["key", "value"]).unwrap();
            for (k, v) in scalars(&report.result) {
                w.write_record([k, v]).unwrap();
            }
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).unwrap() + "\n",
        Format::Table => render_table(report),
        Format::Csv => render_csv(report),
    }
}
