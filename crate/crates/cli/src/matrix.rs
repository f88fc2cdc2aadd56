//! Plain-text matrices: one row per line, whitespace-separated decimals.
//! Blank lines and lines starting with `#` are skipped.

use crate::Failure;

pub fn parse(path: &str, text: &str) -> Result<Vec<Vec<f64>>, Failure> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .enumerate()
            .map(|(j, tok)| match tok.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Failure::input(format!("{path}: line {}, entry {}: `{tok}` is not a finite decimal", i + 1, j + 1))),
            })
            .collect::<Result<Vec<f64>, Failure>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(Failure::input(format!(
                    "{path}: line {}: {} entries, expected {first}",
                    i + 1,
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read(path: &str) -> Result<Vec<Vec<f64>>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))?;
    parse(path, &text)
}

/// A single vector: all entries of the file in reading order.
pub fn read_vector(path: &str) -> Result<Vec<f64>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))?;
    let rows = parse(path, &text)?;
    match rows.len() {
        1 => Ok(rows.into_iter().next().unwrap()),
        0 => Err(Failure::input(format!("{path}: empty vector"))),
        // A column vector: one entry per line.
        _ if rows.iter().all(|r| r.len() == 1) => Ok(rows.into_iter().map(|r| r[0]).collect()),
        _ => Err(Failure::input(format!("{path}: expected a single row or column"))),
    }
}
