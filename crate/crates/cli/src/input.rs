//! Reading observations and writing results.

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Reads a CSV whose only column is headed `value`.
pub fn read_values(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        .clone();
    if headers.len() != 1 || &headers[0] != "value" {
        return Err(CliError::Usage(format!(
            "{}: expected a single column headed 'value'",
            path.display()
        )));
    }
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let field = &record[0];
        let v: f64 = field.parse().map_err(|_| {
            CliError::Usage(format!(
                "{}: row {} is not a number: '{field}'",
                path.display(),
                row + 2
            ))
        })?;
        if !v.is_finite() {
            return Err(CliError::Usage(format!(
                "{}: row {} is not finite",
                path.display(),
                row + 2
            )));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::Usage(format!("{}: no observations", path.display())));
    }
    Ok(values)
}

/// Writes `content` to `path`, or to standard output when `path` is `None`.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, content).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Usage(format!("cannot write to standard output: {e}")))
        }
    }
}
