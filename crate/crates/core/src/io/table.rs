//! Numeric CSV tables: the regression-diff contract of every run.
//!
//! Fixed schema: header row always present, first column is time (1/ω_c) or
//! tau_i (1/ω_c), values printed with 15 significant digits in scientific
//! notation (locale-independent). Writes are atomic (temp file + rename).

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::PopulationTrace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width != column count");
        self.rows.push(row);
    }

    /// Trace → table with columns `t, p_<label>…, norm`.
    pub fn from_trace(trace: &PopulationTrace, time_column: &str) -> Self {
        let mut columns = vec![time_column.to_string()];
        columns.extend(trace.labels().iter().map(|l| format!("p_{l}")));
        columns.push("norm".to_string());
        let mut table = Table::new(columns);
        for i in 0..trace.len() {
            let mut row = Vec::with_capacity(trace.labels().len() + 2);
            row.push(trace.times()[i]);
            row.extend_from_slice(trace.row(i));
            row.push(trace.norms()[i]);
            table.push_row(row);
        }
        table
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                // 15 significant digits
                let _ = write!(out, "{v:.14e}");
            }
            out.push('\n');
        }
        out
    }

    /// Atomic CSV write: temp file in the same directory, then rename.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::io::record::write_atomic(path, self.to_csv_string().as_bytes())
    }

    pub fn read_csv(path: &Path) -> Result<Table> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::SchemaMismatch(format!("{}: empty file", path.display())))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|cell| {
                    cell.parse::<f64>().map_err(|_| {
                        Error::SchemaMismatch(format!(
                            "{}:{}: non-numeric cell '{cell}'",
                            path.display(),
                            lineno + 2
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != columns.len() {
                return Err(Error::SchemaMismatch(format!(
                    "{}:{}: expected {} cells, got {}",
                    path.display(),
                    lineno + 2,
                    columns.len(),
                    row.len()
                )));
            }
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }

    /// Per-column max |a − b|; errors if the schemas differ.
    pub fn max_column_deviation(&self, other: &Table) -> Result<Vec<(String, f64)>> {
        if self.columns != other.columns {
            return Err(Error::SchemaMismatch(format!(
                "column sets differ: {:?} vs {:?}",
                self.columns, other.columns
            )));
        }
        if self.rows.len() != other.rows.len() {
            return Err(Error::SchemaMismatch(format!(
                "row counts differ: {} vs {}",
                self.rows.len(),
                other.rows.len()
            )));
        }
        let mut devs = vec![0.0_f64; self.columns.len()];
        for (ra, rb) in self.rows.iter().zip(other.rows.iter()) {
            for (j, (a, b)) in ra.iter().zip(rb.iter()).enumerate() {
                devs[j] = devs[j].max((a - b).abs());
            }
        }
        Ok(self.columns.iter().cloned().zip(devs).collect())
    }
}
