//! CSV and JSON emission.

use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(usize),
    Real(f64),
    Bool(bool),
    Text(&'static str),
}

impl Cell {
    /// Shortest representation that parses back to the same `f64`;
    /// integral values print without a fraction.
    fn render(&self) -> String {
        match *self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) if v.fract() == 0.0 && v.abs() < 1e15 => format!("{v}"),
            Cell::Real(v) => format!("{v:?}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).map_err(io_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io_error)?;
        }
        let bytes = w.into_inner().map_err(|e| io_error(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ascii"))
    }
}

fn io_error(e: impl Into<std::io::Error>) -> CliError {
    CliError::Io(e.into().to_string())
}

pub fn to_json(report: &Value) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Writes `report.json` and `table.csv` into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, report: &Value, table: &Table) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_error)?;
    fs::write(dir.join("report.json"), to_json(report)).map_err(io_error)?;
    fs::write(dir.join("table.csv"), table.to_csv()?).map_err(io_error)?;
    Ok(())
}
