//! CSV ingestion and tabular output.
//!
//! Rows are points. A first row in which no cell parses as a number is a
//! header; when its last cell is `label`, that column carries integer
//! ground-truth labels.

use std::fs;
use std::path::Path;

use ipursuit::datagen::DataMatrix;
use ipursuit::linalg::Matrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error on line {line}: {reason}")]
    ParseError { line: u64, reason: String },
    #[error("file contains no data rows")]
    EmptyFile,
    #[error("line {line} is an all-zero point")]
    ZeroRow { line: u64 },
}

fn parse_err(line: u64, reason: impl Into<String>) -> LoadError {
    LoadError::ParseError {
        line,
        reason: reason.into(),
    }
}

/// Reads `path` into a column-normalized [`DataMatrix`].
pub fn load_csv(path: &Path) -> Result<DataMatrix, LoadError> {
    let bytes = fs::read(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&bytes)
}

/// Parses CSV bytes; see [`load_csv`].
pub fn parse_csv(bytes: &[u8]) -> Result<DataMatrix, LoadError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let mut width: Option<usize> = None;
    let mut has_labels = false;
    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut rows = 0usize;

    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(idx as u64 + 1, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if idx == 0 && record.iter().all(|c| c.parse::<f64>().is_err()) {
            has_labels = record.iter().next_back() == Some("label");
            width = Some(record.len());
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_err(line, format!("expected {w} fields, found {}", record.len())));
        }
        let n_features = if has_labels { w - 1 } else { w };
        if n_features == 0 {
            return Err(parse_err(line, "no feature columns"));
        }
        let mut nonzero = false;
        for cell in record.iter().take(n_features) {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("`{cell}` is not finite")));
            }
            nonzero |= v != 0.0;
            values.push(v);
        }
        if !nonzero {
            return Err(LoadError::ZeroRow { line });
        }
        if has_labels {
            let cell = &record[w - 1];
            let l = cell
                .parse::<usize>()
                .map_err(|_| parse_err(line, format!("label `{cell}` is not a nonnegative integer")))?;
            labels.push(l);
        }
        rows += 1;
    }

    if rows == 0 {
        return Err(LoadError::EmptyFile);
    }
    let n_features = values.len() / rows;
    // Row-major storage of N×M is column-major storage of M×N.
    let points = Matrix::from_column_slice(n_features, rows, &values);
    let labels = has_labels.then_some(labels);
    // Zero rows are rejected above, so normalization cannot fail.
    Ok(DataMatrix::from_unnormalized(points, labels).expect("rows validated as finite and nonzero"))
}

/// Writes one label per line.
pub fn labels_to_string(labels: &[usize]) -> String {
    let mut s = String::with_capacity(labels.len() * 3);
    for l in labels {
        s.push_str(&l.to_string());
        s.push('\n');
    }
    s
}

/// Serializes records with a header row to an in-memory CSV string.
pub fn to_csv_string<T: serde::Serialize>(rows: &[T]) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_rows_normalize() {
        let d = parse_csv(b"1,0\n0,2\n").unwrap();
        assert_eq!(d.points(), &Matrix::identity(2, 2));
        assert!(d.labels().is_none());
    }

    #[test]
    fn header_with_labels() {
        let d = parse_csv(b"x0,x1,label\n1,0,0\n0,1,1\n").unwrap();
        assert_eq!(d.labels(), Some(&[0, 1][..]));
        assert_eq!(d.ambient_dim(), 2);
    }

    #[test]
    fn header_without_labels() {
        let d = parse_csv(b"a,b\n3,4\n").unwrap();
        assert!(d.labels().is_none());
        assert!((d.points()[(0, 0)] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn malformed_cell_reports_line() {
        match parse_csv(b"1,abc\n") {
            Err(LoadError::ParseError { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        match parse_csv(b"1,2\n3,x\n") {
            Err(LoadError::ParseError { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_and_nonfinite_rows_rejected() {
        assert!(matches!(parse_csv(b"1,2\n3\n"), Err(LoadError::ParseError { line: 2, .. })));
        assert!(matches!(parse_csv(b"1,NaN\n"), Err(LoadError::ParseError { line: 1, .. })));
        assert!(matches!(parse_csv(b"x,label\n1,-1\n"), Err(LoadError::ParseError { line: 2, .. })));
    }

    #[test]
    fn empty_and_zero() {
        assert!(matches!(parse_csv(b""), Err(LoadError::EmptyFile)));
        assert!(matches!(parse_csv(b"x0,x1\n"), Err(LoadError::EmptyFile)));
        assert!(matches!(parse_csv(b"1,1\n0,0\n"), Err(LoadError::ZeroRow { line: 2 })));
    }

    #[test]
    fn labels_one_per_line() {
        assert_eq!(labels_to_string(&[2, 0, 1]), "2\n0\n1\n");
    }
}
