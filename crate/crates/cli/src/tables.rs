//! Reference tables: center-of-mass (n, λ) pairs and Pilar parameters.

use std::path::{Path, PathBuf};

use compound_returns::pairing::com_pair_table;
use compound_returns::pilar::{pilar_table, PilarResult, REFERENCE_TARGETS};

use crate::error::Result;
use crate::table::{fmt_float, CsvTable};

/// Targets of the two Pilars used in the Atari-style experiments.
pub const EXPERIMENT_PILAR_TARGETS: [f64; 2] = [3.0, 5.0];

pub const COM_PAIRS_FILE: &str = "com_pairs.csv";
pub const EXPERIMENT_PILARS_FILE: &str = "experiment_pilars.csv";
pub const PILAR_REFERENCE_FILE: &str = "pilar_reference.csv";

pub fn com_pairs_table() -> CsvTable {
    let mut t = CsvTable::new(&["n", "lambda"]);
    for (n, lambda) in com_pair_table() {
        t.push(vec![n.to_string(), fmt_float(lambda)]);
    }
    t
}

/// One row per target: `n, n1, n2, c, error`.
pub fn pilar_csv(targets: &[f64], rows: &[PilarResult]) -> CsvTable {
    let mut t = CsvTable::new(&["n", "n1", "n2", "c", "error"]);
    for (n, r) in targets.iter().zip(rows) {
        t.push(vec![
            n.to_string(),
            r.n1.to_string(),
            r.n2.to_string(),
            fmt_float(r.c),
            fmt_float(r.error),
        ]);
    }
    t
}

pub fn pilar_reference(gamma: f64) -> Result<CsvTable> {
    Ok(pilar_csv(&REFERENCE_TARGETS, &pilar_table(gamma, &REFERENCE_TARGETS)?))
}

/// Pilar table for `targets` (the reference set when empty), as aligned
/// text for the terminal and as CSV.
pub fn pilar_report(gamma: f64, targets: &[f64]) -> Result<(String, CsvTable)> {
    let targets = if targets.is_empty() {
        &REFERENCE_TARGETS[..]
    } else {
        targets
    };
    let rows = pilar_table(gamma, targets)?;
    let mut text = format!("{:>8} {:>5} {:>6} {:>7} {:>10}\n", "n", "n1", "n2", "c", "error");
    for (n, r) in targets.iter().zip(&rows) {
        text += &format!("{n:>8} {:>5} {:>6} {:>7.3} {:>10.3e}\n", r.n1, r.n2, r.c, r.error);
    }
    Ok((text, pilar_csv(targets, &rows)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TablePaths {
    pub com_pairs: PathBuf,
    pub experiment_pilars: PathBuf,
    pub pilar_reference: PathBuf,
}

/// Writes the three reference tables into `dir`.
pub fn emit_tables(gamma: f64, dir: &Path) -> Result<TablePaths> {
    let paths = TablePaths {
        com_pairs: dir.join(COM_PAIRS_FILE),
        experiment_pilars: dir.join(EXPERIMENT_PILARS_FILE),
        pilar_reference: dir.join(PILAR_REFERENCE_FILE),
    };
    com_pairs_table().write(&paths.com_pairs)?;
    let experiment = pilar_table(gamma, &EXPERIMENT_PILAR_TARGETS)?;
    pilar_csv(&EXPERIMENT_PILAR_TARGETS, &experiment).write(&paths.experiment_pilars)?;
    pilar_reference(gamma)?.write(&paths.pilar_reference)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_rows_agree_with_reference() {
        let reference = pilar_reference(0.99).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_tables(0.99, dir.path()).unwrap();
        let experiment = CsvTable::read(&paths.experiment_pilars).unwrap();
        for row in &experiment.rows {
            let same = reference.rows.iter().find(|r| r[0] == row[0]).unwrap();
            assert_eq!(same, row);
        }
        let com = CsvTable::read(&paths.com_pairs).unwrap();
        let twenty = com.rows.iter().find(|r| r[0] == "20").unwrap();
        assert_eq!(format!("{:.2}", twenty[1].parse::<f64>().unwrap()), "0.95");
    }
}
