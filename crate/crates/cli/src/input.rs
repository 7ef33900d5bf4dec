//! CSV loading for the `test` subcommand.

use std::fmt;
use std::path::Path;

use hsic_core::{Dataset, Points};

#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

/// Splits a comma-separated column list, dropping empty entries.
pub fn parse_columns(spec: &str) -> Vec<String> {
    spec.split(',')
        .map(|c| c.trim().to_string())
        .filter(|c| !c.is_empty())
        .collect()
}

/// Reads `path` (header row required) and returns the selected columns as a
/// paired dataset. Missing, empty or non-numeric cells are errors; nothing
/// is imputed.
pub fn load_dataset(
    path: &Path,
    x_columns: &[String],
    y_columns: &[String],
) -> Result<Dataset<f64>, InputError> {
    if x_columns.is_empty() || y_columns.is_empty() {
        return Err(InputError(
            "at least one x and one y column must be selected".into(),
        ));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| InputError(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| InputError(format!("cannot read CSV header: {e}")))?
        .clone();
    let index_of = |name: &String| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| InputError(format!("unknown column `{name}`")))
    };
    let xi = x_columns
        .iter()
        .map(index_of)
        .collect::<Result<Vec<_>, _>>()?;
    let yi = y_columns
        .iter()
        .map(index_of)
        .collect::<Result<Vec<_>, _>>()?;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (row, record) in reader.records().enumerate() {
        // header is line 1
        let line = row + 2;
        let record = record.map_err(|e| InputError(format!("line {line}: {e}")))?;
        for (cols, names, out) in [(&xi, x_columns, &mut xs), (&yi, y_columns, &mut ys)] {
            for (&c, name) in cols.iter().zip(names) {
                let cell = record.get(c).unwrap_or("");
                if cell.is_empty() {
                    return Err(InputError(format!(
                        "line {line}: missing value in column `{name}`"
                    )));
                }
                let v: f64 = cell.parse().map_err(|_| {
                    InputError(format!(
                        "line {line}: non-numeric value `{cell}` in column `{name}`"
                    ))
                })?;
                if !v.is_finite() {
                    return Err(InputError(format!(
                        "line {line}: non-finite value `{cell}` in column `{name}`"
                    )));
                }
                out.push(v);
            }
        }
    }
    let to_err = |e: hsic_core::Error| InputError(e.to_string());
    let x = Points::new(xi.len(), xs).map_err(to_err)?;
    let y = Points::new(yi.len(), ys).map_err(to_err)?;
    Dataset::new(x, y).map_err(to_err)
}
