//! Fixed-schema CSV output shared by all experiments.
//!
//! Every file starts with a header row. Floats are written in scientific
//! notation with ten significant digits so that identical inputs give
//! byte-identical files.

use std::path::Path;

use crate::error::{ExperimentError, Result};

pub fn fmt_float(x: f64) -> String {
    format!("{x:.9e}")
}

/// A header plus rows of already formatted cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| ExperimentError::Csv {
            line: 0,
            msg: e.to_string(),
        };
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| ExperimentError::Csv {
            line: 0,
            msg: e.to_string(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.to_csv_string()?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
        }
        std::fs::write(path, text).map_err(|e| ExperimentError::io(path, e))
    }

    /// Reads a CSV file, reporting malformed records with their line number.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let line_of = |e: &csv::Error| e.position().map_or(0, |p| p.line());
        let header = reader
            .headers()
            .map_err(|e| ExperimentError::Csv {
                line: line_of(&e).max(1),
                msg: e.to_string(),
            })?
            .iter()
            .map(str::to_string)
            .collect::<Vec<_>>();
        if header.is_empty() || header.iter().all(|h| h.is_empty()) {
            return Err(ExperimentError::Csv {
                line: 1,
                msg: "missing header row".into(),
            });
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| ExperimentError::Csv {
                line: line_of(&e),
                msg: e.to_string(),
            })?;
            rows.push(record.iter().map(str::to_string).collect());
        }
        Ok(CsvTable { header, rows })
    }

    /// Index of column `name`.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Float in row `row` (0-based data row), column `col`; errors carry
    /// the file line number (header is line 1).
    pub fn float(&self, row: usize, col: usize) -> Result<f64> {
        let cell = &self.rows[row][col];
        cell.trim().parse::<f64>().map_err(|e| ExperimentError::Csv {
            line: row as u64 + 2,
            msg: format!("column `{}`: cannot parse `{cell}` as a number: {e}", self.header[col]),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_ten_significant_digits() {
        assert_eq!(fmt_float(0.5745), "5.745000000e-1");
        assert_eq!(fmt_float(-12.0), "-1.200000000e1");
        assert_eq!(fmt_float(0.0), "0.000000000e0");
    }

    #[test]
    fn round_trip_and_line_numbers() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec!["x".into(), fmt_float(1.5)]);
        t.push(vec!["y".into(), "oops".into()]);
        let text = t.to_csv_string().unwrap();
        let back = CsvTable::parse(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.float(0, 1).unwrap(), 1.5);
        match back.float(1, 1) {
            Err(ExperimentError::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match CsvTable::parse("a,b\n1,2\n3\n") {
            Err(ExperimentError::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
