//! Matrix JSON files: `{"n": 3, "entries": [["1", "-1/2", "2+i"], ...]}`.
//!
//! Rectangular matrices use `"rows"` and `"cols"` in place of `"n"`. The
//! canonical serialization (no whitespace, canonical scalar text) is the
//! input to the content hash.

use keller_algebra::{ExactMatrix, GaussianRational};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixFileError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{0}")]
    Shape(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    n: Option<usize>,
    rows: Option<usize>,
    cols: Option<usize>,
    entries: Vec<Vec<GaussianRational>>,
}

/// Parses a matrix file. Syntax and scalar errors carry line and column.
pub fn parse_matrix(text: &str) -> Result<ExactMatrix, MatrixFileError> {
    let raw: RawMatrix = serde_json::from_str(text).map_err(|e| MatrixFileError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let (rows, cols) = match (raw.n, raw.rows, raw.cols) {
        (Some(n), None, None) => (n, n),
        (None, Some(r), Some(c)) => (r, c),
        _ => return Err(MatrixFileError::Shape("give either \"n\" or both \"rows\" and \"cols\"".into())),
    };
    if raw.entries.len() != rows {
        return Err(MatrixFileError::Shape(format!("expected {rows} rows, found {}", raw.entries.len())));
    }
    if let Some((i, r)) = raw.entries.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(MatrixFileError::Shape(format!(
            "row {} has {} entries, expected {cols}",
            i + 1,
            r.len()
        )));
    }
    let flat = raw.entries.into_iter().flatten().collect();
    ExactMatrix::new(rows, cols, flat).map_err(|e| MatrixFileError::Shape(e.to_string()))
}

/// Compact canonical text; identical matrices give identical bytes.
pub fn canonical_json(a: &ExactMatrix) -> String {
    serde_json::to_string(a).expect("matrix serializes")
}

/// One row per line, for files meant to be read by people.
pub fn pretty_json(a: &ExactMatrix) -> String {
    let rows: Vec<String> = a
        .to_rows()
        .iter()
        .map(|r| format!("    {}", serde_json::to_string(r).expect("row serializes").replace("\",\"", "\", \"")))
        .collect();
    let header = if a.is_square() {
        format!("\"n\": {}", a.rows())
    } else {
        format!("\"rows\": {},\n  \"cols\": {}", a.rows(), a.cols())
    };
    format!("{{\n  {header},\n  \"entries\": [\n{}\n  ]\n}}\n", rows.join(",\n"))
}

/// SHA-256 of [`canonical_json`], hex encoded.
pub fn matrix_hash(a: &ExactMatrix) -> String {
    hex::encode(Sha256::digest(canonical_json(a).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_hash() {
        let text = r#"{"n": 2, "entries": [["1", "2/4"], ["-i", "1/3+2*i"]]}"#;
        let a = parse_matrix(text).unwrap();
        assert_eq!(a.get(0, 1), &GaussianRational::from_frac(1, 2));
        assert_eq!(canonical_json(&a), r#"{"n":2,"entries":[["1","1/2"],["-i","1/3+2*i"]]}"#);
        assert_eq!(parse_matrix(&pretty_json(&a)).unwrap(), a);
        let spaced = "{\n\"entries\" :[[ \"1\",\"1/2\"],\n [\"-i\", \"1/3+2*i\"]], \"n\":2 }";
        assert_eq!(matrix_hash(&parse_matrix(spaced).unwrap()), matrix_hash(&a));
    }

    #[test]
    fn rectangular_files() {
        let a = parse_matrix(r#"{"rows": 1, "cols": 2, "entries": [["1", "0"]]}"#).unwrap();
        assert_eq!((a.rows(), a.cols()), (1, 2));
        assert_eq!(parse_matrix(&canonical_json(&a)).unwrap(), a);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_matrix("{\"n\": 1,\n \"entries\": [[\"1/0\"]]}") {
            Err(MatrixFileError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_matrix("{\"n\": 1, \"entries\": [[\"1\"]"), Err(MatrixFileError::Syntax { .. })));
        assert!(matches!(
            parse_matrix(r#"{"n": 2, "entries": [["1", "2"]]}"#),
            Err(MatrixFileError::Shape(_))
        ));
        assert!(matches!(
            parse_matrix(r#"{"n": 1, "entries": [["1", "2"]]}"#),
            Err(MatrixFileError::Shape(_))
        ));
    }
}
