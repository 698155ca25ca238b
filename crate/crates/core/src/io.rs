//! Numeric text input: CSV files, comma-separated lists and `;`-separated
//! matrices.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

fn parse_cell(cell: &str, row: usize, column: usize) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        row,
        column,
        message: format!("not a number: {:?}", cell.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            row,
            column,
            message: format!("non-finite value {:?}", cell.trim()),
        });
    }
    Ok(v)
}

/// Parses CSV text into an `n x d` matrix, one observation per record.
/// A first record with no numeric cell is taken as a header. Rows and
/// columns in errors are 1-based and count the header line.
pub fn parse_csv(text: &str, expected_columns: Option<usize>) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if i == 0 && record.iter().all(|c| c.parse::<f64>().is_err()) {
            width = Some(record.len());
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::DimensionMismatch {
                expected: w,
                got: record.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            values.push(parse_cell(cell, row, j + 1)?);
        }
        rows += 1;
    }
    let d = width.unwrap_or(0);
    if rows == 0 || d == 0 {
        return Err(Error::InvalidData("no data rows".into()));
    }
    if let Some(e) = expected_columns {
        if e != d {
            return Err(Error::DimensionMismatch { expected: e, got: d });
        }
    }
    Ok(DMatrix::from_row_slice(rows, d, &values))
}

pub fn read_csv<P: AsRef<Path>>(path: P, expected_columns: Option<usize>) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::InvalidData(format!("cannot read {}: {e}", path.as_ref().display())))?;
    parse_csv(&text, expected_columns)
}

/// `"1, 2.5,-3"` as a vector.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Err(Error::InvalidData("empty list".into()));
    }
    text.split(',').enumerate().map(|(j, c)| parse_cell(c, 1, j + 1)).collect()
}

/// `"1,0.5;0.5,1"`: rows separated by `;`, entries by `,`.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let rows = text.split(';').map(parse_list).collect::<Result<Vec<_>>>()?;
    let d = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: r.len() });
    }
    Ok(DMatrix::from_row_slice(rows.len(), d, &rows.concat()))
}

pub fn parse_vector(text: &str) -> Result<DVector<f64>> {
    parse_list(text).map(DVector::from_vec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_columns() {
        let m = parse_csv("x,y\n1,2\n3,4\n5,6\n", Some(2)).unwrap();
        assert_eq!(m.shape(), (3, 2));
        assert_eq!(m[(2, 1)], 6.0);
        let v = parse_csv("1\n2\n3\n", None).unwrap();
        assert_eq!(v.shape(), (3, 1));
    }

    #[test]
    fn located_errors() {
        assert!(matches!(parse_csv("1\n2\nabc\n", None), Err(Error::Parse { row: 3, column: 1, .. })));
        assert!(matches!(parse_csv("x,y\n1,2\nNaN,1\n", None), Err(Error::Parse { row: 3, column: 1, .. })));
        assert!(matches!(parse_csv("1,inf\n", None), Err(Error::Parse { row: 1, column: 2, .. })));
        assert!(matches!(parse_csv("1,2\n3\n", None), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
        assert!(matches!(parse_csv("1,2\n", Some(1)), Err(Error::DimensionMismatch { expected: 1, got: 2 })));
        assert!(parse_csv("", None).is_err());
    }

    #[test]
    fn lists_and_matrices() {
        assert_eq!(parse_list("1, 2.5,-3").unwrap(), vec![1.0, 2.5, -3.0]);
        assert!(parse_list("1,,2").is_err());
        let m = parse_matrix("1,0.5;0.5,1").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]));
        assert!(parse_matrix("1,2;3").is_err());
    }
}
