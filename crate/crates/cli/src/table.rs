//! Tabular experiment output rendered as CSV with `#`-prefixed metadata.
//!
//! Data rows are fully determined by the configuration; the only
//! run-dependent line is the `generated_unix` metadata entry, which carries
//! the wall clock and is excluded from any determinism comparison by its
//! `#` prefix.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};

/// One table cell. Reals print with nine significant digits in scientific
/// notation; infinities print as `inf` / `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => {
                if v.is_nan() {
                    "nan".to_string()
                } else if v.is_infinite() {
                    if *v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
                } else {
                    format!("{v:.8e}")
                }
            }
            Cell::Text(v) => quote_csv(v),
        }
    }
}

/// Quotes a field per RFC 4180 when it contains a comma, quote, or newline.
fn quote_csv(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    experiment: &'static str,
    metadata: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    /// Starts a table with the standard metadata block: tool identity, the
    /// experiment name, and every resolved parameter in key order.
    pub fn for_run(config: &ScenarioConfig, columns: &[&'static str]) -> ResultTable {
        let mut metadata = vec![
            ("tool".to_string(), "wpc-lab".to_string()),
            (
                "version".to_string(),
                env!("CARGO_PKG_VERSION").to_string(),
            ),
            ("experiment".to_string(), config.experiment().to_string()),
        ];
        for (key, value) in config.params() {
            metadata.push((key.clone(), value.render()));
        }
        ResultTable {
            experiment: config.experiment(),
            metadata,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn experiment(&self) -> &'static str {
        self.experiment
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row arity does not match the header"
        );
        self.rows.push(row);
    }

    /// Appends the wall-clock stamp; kept separate so tests can render
    /// tables without a time-dependent line.
    pub fn stamp_wall_clock(&mut self) {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs().to_string())
            .unwrap_or_else(|_| "0".to_string());
        self.metadata.push(("generated_unix".to_string(), now));
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.metadata {
            out.push_str(&format!("# {key} = {value}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line = row
                .iter()
                .map(Cell::render)
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Writes `{dir}/{experiment}.csv`, creating the directory if needed.
    pub fn write_csv(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(CliError::Io)?;
        let path = dir.join(format!("{}.csv", self.experiment));
        fs::write(&path, self.render_csv()).map_err(CliError::Io)?;
        Ok(path)
    }
}
