//! CSV ingestion.
//!
//! Cells are parsed as numbers, or as one of the binary words below
//! (case-insensitive):
//!
//! | word     | value |
//! |----------|-------|
//! | `female` | 1     |
//! | `male`   | 0     |
//! | `yes`    | 1     |
//! | `no`     | 0     |

use std::fs::File;
use std::path::Path;

use ndarray::Array2;
use rbc::Dataset;

use crate::error::{CliError, Result};

pub const BINARY_WORDS: [(&str, f64); 4] = [("female", 1.0), ("male", 0.0), ("yes", 1.0), ("no", 0.0)];

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    /// Column-major values.
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|c| c == name)
            .map(|i| &self.columns[i][..])
            .ok_or_else(|| CliError::Data(format!("missing column '{name}' (have {})", self.names.join(", "))))
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    let t = cell.trim();
    if let Ok(v) = t.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    BINARY_WORDS
        .iter()
        .find(|(w, _)| w.eq_ignore_ascii_case(t))
        .map(|&(_, v)| v)
}

/// Reads every column of a headed CSV file.
///
/// Row numbers in errors are 1-based data rows (the header is row 0).
pub fn load_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(CliError::Data(format!("{}: empty header", path.display())));
    }
    let mut columns = vec![Vec::new(); names.len()];
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(format!("{}: row {}: {e}", path.display(), r + 1)))?;
        for (c, cell) in record.iter().enumerate() {
            let v = parse_cell(cell).ok_or_else(|| {
                CliError::Data(format!(
                    "{}: row {}, column '{}': cannot parse '{cell}'",
                    path.display(),
                    r + 1,
                    names[c]
                ))
            })?;
            columns[c].push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    Ok(Table { names, columns })
}

/// Column means and standard deviations used to z-standardize covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaling {
    /// `(column, mean, sd)` for every standardized column.
    pub entries: Vec<(String, f64, f64)>,
}

impl Scaling {
    pub fn get(&self, name: &str) -> Option<(f64, f64)> {
        self.entries.iter().find(|e| e.0 == name).map(|e| (e.1, e.2))
    }
}

fn is_binary(values: &[f64]) -> bool {
    values.iter().all(|&v| v == 0.0 || v == 1.0)
}

/// Builds a dataset from `table`, with `outcome` as the response and
/// `covariates` (in order) as columns.
///
/// With `standardize`, every non-binary covariate is centred and divided by
/// its sample standard deviation; the returned [`Scaling`] records the
/// transformation.
pub fn to_dataset(table: &Table, outcome: &str, covariates: &[String], standardize: bool) -> Result<(Dataset, Option<Scaling>)> {
    let y_raw = table.column(outcome)?;
    let y = y_raw
        .iter()
        .enumerate()
        .map(|(r, &v)| match v {
            0.0 => Ok(0u8),
            1.0 => Ok(1u8),
            _ => Err(CliError::Data(format!(
                "row {}, column '{outcome}': outcome must be 0 or 1, got {v}",
                r + 1
            ))),
        })
        .collect::<Result<Vec<u8>>>()?;
    if covariates.is_empty() {
        return Err(CliError::Usage("no covariates selected".into()));
    }
    let n = table.n_rows();
    let mut x = Array2::zeros((n, covariates.len()));
    let mut entries = Vec::new();
    for (j, name) in covariates.iter().enumerate() {
        if name == outcome {
            return Err(CliError::Usage(format!("outcome '{outcome}' cannot also be a covariate")));
        }
        let col = table.column(name)?;
        let (shift, scale) = if standardize && !is_binary(col) {
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
            let sd = var.sqrt();
            if !(sd > 0.0) {
                return Err(CliError::Data(format!("column '{name}' is constant and cannot be standardized")));
            }
            entries.push((name.clone(), mean, sd));
            (mean, sd)
        } else {
            (0.0, 1.0)
        };
        for (i, &v) in col.iter().enumerate() {
            x[[i, j]] = (v - shift) / scale;
        }
    }
    let data = Dataset::new(x, y, covariates.to_vec())?;
    Ok((data, standardize.then_some(Scaling { entries })))
}

/// Loads `path` and builds a dataset; see [`to_dataset`].
pub fn load_csv(path: &Path, outcome: &str, covariates: &[String], standardize: bool) -> Result<(Dataset, Option<Scaling>)> {
    to_dataset(&load_table(path)?, outcome, covariates, standardize)
}

pub fn write_scaling(path: &Path, scaling: &Scaling) -> Result<()> {
    let mut w = csv_writer(path)?;
    write_row(&mut w, path, &["column", "mean", "sd"])?;
    for (name, mean, sd) in &scaling.entries {
        write_row(&mut w, path, &[name.as_str(), &mean.to_string(), &sd.to_string()])?;
    }
    flush(w, path)
}

pub fn read_scaling(path: &Path) -> Result<Scaling> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut entries = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let bad = || CliError::Data(format!("{}: row {}: expected column,mean,sd", path.display(), r + 1));
        let record = record.map_err(|_| bad())?;
        if record.len() != 3 {
            return Err(bad());
        }
        let num = |i: usize| record[i].trim().parse::<f64>().map_err(|_| bad());
        entries.push((record[0].trim().to_string(), num(1)?, num(2)?));
    }
    Ok(Scaling { entries })
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

pub(crate) fn write_row<S: AsRef<[u8]>>(w: &mut csv::Writer<File>, path: &Path, row: &[S]) -> Result<()> {
    w.write_record(row)
        .map_err(|e| CliError::io(path, std::io::Error::other(e.to_string())))
}

pub(crate) fn flush(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_words_are_case_insensitive() {
        assert_eq!(parse_cell("Female"), Some(1.0));
        assert_eq!(parse_cell(" no "), Some(0.0));
        assert_eq!(parse_cell("maybe"), None);
        assert_eq!(parse_cell("NaN"), None);
        assert_eq!(parse_cell("1e-3"), Some(1e-3));
    }

    #[test]
    fn binary_detection() {
        assert!(is_binary(&[0.0, 1.0, 1.0]));
        assert!(!is_binary(&[0.0, 2.0]));
    }
}
