//! Coefficient tables: `flow,term,estimate`, one `(Intercept)` row per flow.

use std::fs::File;
use std::path::Path;

use rbc::{FlowKind, FlowSpec, ModelSpec};

use crate::data::{csv_writer, flush, write_row};
use crate::error::{CliError, Result};

pub const INTERCEPT: &str = "(Intercept)";

/// Flow, term and value of every row, in model order.
pub fn coefficient_rows(model: &ModelSpec, names: &[String]) -> Vec<(FlowKind, String, f64)> {
    let mut rows = Vec::new();
    for flow in &model.flows {
        rows.push((flow.kind, INTERCEPT.to_string(), flow.intercept));
        for (&j, &b) in flow.covariate_indices.iter().zip(&flow.coefficients) {
            rows.push((flow.kind, names[j].clone(), b));
        }
    }
    rows
}

/// Flows without an intercept get a row with estimate 0.
pub fn write_coefficients(path: &Path, model: &ModelSpec, names: &[String]) -> Result<()> {
    let mut w = csv_writer(path)?;
    write_row(&mut w, path, &["flow", "term", "estimate"])?;
    for (kind, term, value) in coefficient_rows(model, names) {
        write_row(&mut w, path, &[kind.name(), term.as_str(), &value.to_string()])?;
    }
    flush(w, path)
}

/// Rebuilds a model from a coefficient table.
///
/// Covariate columns are numbered by first appearance; the returned names
/// give the column order. A zero intercept is read back as no intercept,
/// which leaves every probability unchanged.
pub fn load_coefficients(path: &Path) -> Result<(ModelSpec, Vec<String>)> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut names: Vec<String> = Vec::new();
    let mut flows: Vec<FlowSpec> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let bad = |what: &str| CliError::Data(format!("{}: row {}: {what}", path.display(), r + 1));
        let record = record.map_err(|e| bad(&e.to_string()))?;
        if record.len() != 3 {
            return Err(bad("expected flow,term,estimate"));
        }
        let kind = FlowKind::parse(record[0].trim()).ok_or_else(|| bad("unknown flow"))?;
        let term = record[1].trim();
        let value: f64 = record[2].trim().parse().map_err(|_| bad("estimate is not a number"))?;
        let pos = match flows.iter().position(|f| f.kind == kind) {
            Some(p) => p,
            None => {
                flows.push(FlowSpec::new(kind, false, vec![]));
                flows.len() - 1
            }
        };
        let flow = &mut flows[pos];
        if term == INTERCEPT {
            flow.has_intercept = value != 0.0;
            flow.intercept = value;
        } else {
            let j = match names.iter().position(|n| n == term) {
                Some(j) => j,
                None => {
                    names.push(term.to_string());
                    names.len() - 1
                }
            };
            flow.covariate_indices.push(j);
            flow.coefficients.push(value);
        }
    }
    if flows.is_empty() {
        return Err(CliError::Data(format!("{}: no coefficients", path.display())));
    }
    Ok((ModelSpec::new(0.5, flows)?, names))
}
