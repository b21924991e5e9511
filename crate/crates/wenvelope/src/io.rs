//! CSV ingestion and data fingerprinting.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Reads a dataset from a CSV file with a header row. Columns are pulled
/// in the order the caller lists them; any missing or non-numeric
/// referenced cell fails with its data row number and column name.
pub fn read_csv(path: &Path, response_cols: &[String], predictor_cols: &[String]) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv_str(&text, &path.to_string_lossy(), response_cols, predictor_cols)
}

/// Same as [`read_csv`] for already-loaded text; `origin` names the
/// source in errors.
pub fn read_csv_str(
    text: &str,
    origin: &str,
    response_cols: &[String],
    predictor_cols: &[String],
) -> Result<Dataset> {
    let origin_path = PathBuf::from(origin);
    let parse_err = |message: String| Error::Parse {
        path: origin_path.clone(),
        message,
    };
    if response_cols.is_empty() || predictor_cols.is_empty() {
        return Err(Error::ContractViolation(
            "need at least one response column and one predictor column".into(),
        ));
    }
    for name in response_cols {
        if predictor_cols.contains(name) {
            return Err(Error::ContractViolation(format!(
                "column '{name}' cannot be both response and predictor"
            )));
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_err(format!("bad header row: {e}")))?
        .clone();
    let locate = |name: &String| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(format!("missing column '{name}'")))
    };
    let response_idx: Vec<usize> = response_cols.iter().map(locate).collect::<Result<_>>()?;
    let predictor_idx: Vec<usize> = predictor_cols.iter().map(locate).collect::<Result<_>>()?;

    let mut y_rows: Vec<Vec<f64>> = Vec::new();
    let mut x_rows: Vec<Vec<f64>> = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(format!("row {}: {e}", row_number + 1)))?;
        let parse_cell = |idx: usize, name: &str| -> Result<f64> {
            let raw = record.get(idx).unwrap_or("");
            raw.parse::<f64>().map_err(|_| {
                parse_err(format!(
                    "row {}, column '{name}': expected a number, found '{raw}'",
                    row_number + 1
                ))
            })
        };
        let mut y_row = Vec::with_capacity(response_idx.len());
        for (idx, name) in response_idx.iter().zip(response_cols) {
            y_row.push(parse_cell(*idx, name)?);
        }
        let mut x_row = Vec::with_capacity(predictor_idx.len());
        for (idx, name) in predictor_idx.iter().zip(predictor_cols) {
            x_row.push(parse_cell(*idx, name)?);
        }
        y_rows.push(y_row);
        x_rows.push(x_row);
    }
    if y_rows.is_empty() {
        return Err(parse_err("no data rows after the header".into()));
    }

    let n = y_rows.len();
    let y = DMatrix::from_fn(n, response_cols.len(), |i, j| y_rows[i][j]);
    let x = DMatrix::from_fn(n, predictor_cols.len(), |i, j| x_rows[i][j]);
    Dataset::new(x, y)
}

/// SHA-256 of the raw file bytes, hex-encoded. Changes iff any input
/// byte changes.
pub fn file_fingerprint(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(hex_digest(&bytes))
}

/// Fingerprint of an in-memory dataset: SHA-256 over the dimensions and
/// the little-endian bytes of both matrices.
pub fn dataset_fingerprint(data: &Dataset) -> String {
    let mut hasher = Sha256::new();
    for dim in [data.n(), data.p(), data.r()] {
        hasher.update((dim as u64).to_le_bytes());
    }
    for v in data.x().iter().chain(data.y().iter()) {
        hasher.update(v.to_le_bytes());
    }
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes one CSV row per bootstrap replicate: index, the BIC-selected
/// dimension (empty when unavailable), then the vectorized estimate.
pub fn write_replicates_csv(
    result: &crate::bootstrap::BootstrapResult,
    path: &Path,
) -> Result<()> {
    let mut out = String::new();
    out.push_str("replicate,u_hat");
    for c in 0..result.r * result.p {
        out.push_str(&format!(",beta_{c}"));
    }
    out.push('\n');
    for i in 0..result.b {
        if result.failures.contains(&i) {
            out.push_str(&format!("{i},failed"));
            for _ in 0..result.r * result.p {
                out.push(',');
            }
            out.push('\n');
            continue;
        }
        let u = result.u_hats[i].map(|u| u.to_string()).unwrap_or_default();
        out.push_str(&format!("{i},{u}"));
        for c in 0..result.r * result.p {
            out.push_str(&format!(",{:?}", result.estimates[(i, c)]));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(name: &str, content: &str) -> PathBuf {
        let path = std::env::temp_dir().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    fn cols(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn reads_columns_in_caller_order() {
        let path = write_temp(
            "wenv_io_ok.csv",
            "a,b,c\n1,2,3\n4,5,6\n7,8,9\n10,11,12\n",
        );
        let data = read_csv(&path, &cols(&["c", "a"]), &cols(&["b"])).unwrap();
        assert_eq!(data.r(), 2);
        assert_eq!(data.y()[(0, 0)], 3.0);
        assert_eq!(data.y()[(0, 1)], 1.0);
        assert_eq!(data.x()[(0, 0)], 2.0);
    }

    #[test]
    fn header_only_file_is_degenerate() {
        let path = write_temp("wenv_io_empty.csv", "a,b\n");
        let err = read_csv(&path, &cols(&["a"]), &cols(&["b"])).unwrap_err();
        assert!(err.to_string().contains("no data rows"), "{err}");
    }

    #[test]
    fn bad_cell_is_located_precisely() {
        let mut body = String::from("a,b\n");
        for i in 0..6 {
            body.push_str(&format!("{i},1\n"));
        }
        body.push_str("oops,1\n");
        let path = write_temp("wenv_io_bad.csv", &body);
        let err = read_csv(&path, &cols(&["a"]), &cols(&["b"])).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("row 7"), "{text}");
        assert!(text.contains("'a'"), "{text}");
        assert!(text.contains("oops"), "{text}");
    }

    #[test]
    fn missing_column_is_named() {
        let path = write_temp("wenv_io_miss.csv", "a,b\n1,2\n");
        let err = read_csv(&path, &cols(&["z"]), &cols(&["b"])).unwrap_err();
        assert!(err.to_string().contains("missing column 'z'"));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let p1 = write_temp("wenv_fp1.csv", "a\n1\n2\n");
        let p2 = write_temp("wenv_fp2.csv", "a\n1\n2\n");
        let p3 = write_temp("wenv_fp3.csv", "a\n1\n3\n");
        assert_eq!(
            file_fingerprint(&p1).unwrap(),
            file_fingerprint(&p2).unwrap()
        );
        assert_ne!(
            file_fingerprint(&p1).unwrap(),
            file_fingerprint(&p3).unwrap()
        );
    }
}
