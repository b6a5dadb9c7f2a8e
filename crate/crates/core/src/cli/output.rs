use std::io::Write;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::experiment::ExperimentOutput;
use crate::error::{Error, Result};
use crate::reference::{residual_sample, ErrorTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Written in place of a failed entry.
pub const CSV_FAILED: &str = "NaN";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(table: &ErrorTable) -> String {
    let mut out = String::from("t");
    for label in table.columns().keys() {
        out.push(',');
        out.push_str(&csv_field(label));
    }
    out.push('\n');
    for (row, t) in table.grid().iter().enumerate() {
        out.push_str(&t.to_string());
        for col in table.columns().values() {
            out.push(',');
            match col[row] {
                Some(v) => out.push_str(&format!("{v:.5e}")),
                None => out.push_str(CSV_FAILED),
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    grid: Vec<f64>,
    columns: IndexMap<String, Vec<Option<f64>>>,
    #[serde(default)]
    meta: IndexMap<String, Value>,
}

pub fn render_json(table: &ErrorTable, meta: &IndexMap<String, Value>) -> String {
    let doc = JsonTable {
        grid: table.grid().to_vec(),
        columns: table.columns().clone(),
        meta: meta.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
    s.push('\n');
    s
}

/// Inverse of [`render_json`].
pub fn parse_json(src: &str) -> Result<(ErrorTable, IndexMap<String, Value>)> {
    let doc: JsonTable = serde_json::from_str(src).map_err(|e| Error::Config(format!("table json: {e}")))?;
    let mut table = ErrorTable::new(doc.grid)?;
    for (label, values) in doc.columns {
        table.push_column(label, values)?;
    }
    Ok((table, doc.meta))
}

fn write_to(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn render(table: &ErrorTable, meta: &IndexMap<String, Value>, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => render_csv(table),
        OutputFormat::Json => render_json(table, meta),
    }
}

/// Write the table to `path`, or stdout when `None`.
pub fn emit_table(out: &ExperimentOutput, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    write_to(path, &render(&out.table, &out.meta, format))
}

/// Residual curves of every run on `t = (i + 1) / density`, `i < density`.
pub fn plot_table(out: &ExperimentOutput, density: usize) -> Result<ErrorTable> {
    if density < 2 {
        return Err(Error::arg("plot density must be at least 2"));
    }
    let grid: Vec<f64> = (0..density).map(|i| (i + 1) as f64 / density as f64).collect();
    let mut table = ErrorTable::new(grid.clone())?;
    for run in &out.runs {
        let values = grid
            .iter()
            .map(|&t| run.solution.as_ref().and_then(|s| residual_sample(s, &run.problem, t).ok()))
            .collect();
        table.push_column(format!("residual[{}]", run.tag()), values)?;
    }
    Ok(table)
}

pub fn emit_plot_data(out: &ExperimentOutput, density: usize, format: OutputFormat, path: &Path) -> Result<()> {
    let table = plot_table(out, density)?;
    write_to(Some(path), &render(&table, &IndexMap::new(), format))
}
