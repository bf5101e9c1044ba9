//! Keel-style CSV ingestion for metric-learning datasets.
//!
//! Format: optional `@...` header lines (relation/attribute/data markers)
//! and `%` comments are skipped; every other non-empty line is a
//! comma-separated row of numeric features with the class label (string or
//! integer) in the final column. Features are z-score normalized per
//! column, deterministically; constant columns are left at zero.

use nalgebra::DMatrix;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error reading dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dataset is empty")]
    Empty,
}

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    /// N x d z-scored features.
    pub features: DMatrix<f64>,
    /// Dense class ids 0..c.
    pub labels: Vec<usize>,
    /// Original label strings in id order.
    pub label_names: Vec<String>,
}

impl LabeledDataset {
    pub fn num_classes(&self) -> usize {
        self.label_names.len()
    }
}

pub fn load_keel_csv(path: impl AsRef<Path>) -> Result<LabeledDataset, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    parse_keel_csv(&text)
}

pub fn parse_keel_csv(text: &str) -> Result<LabeledDataset, DatasetError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels_raw: Vec<String> = Vec::new();
    let mut width = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('@') || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(DatasetError::Parse {
                line: idx + 1,
                message: "need at least one feature and a label".into(),
            });
        }
        let d = fields.len() - 1;
        match width {
            None => width = Some(d),
            Some(w) if w != d => {
                return Err(DatasetError::Parse {
                    line: idx + 1,
                    message: format!("expected {w} features, got {d}"),
                })
            }
            _ => {}
        }
        let mut row = Vec::with_capacity(d);
        for f in &fields[..d] {
            row.push(f.parse::<f64>().map_err(|e| DatasetError::Parse {
                line: idx + 1,
                message: format!("bad feature '{f}': {e}"),
            })?);
        }
        rows.push(row);
        labels_raw.push(fields[d].to_string());
    }
    if rows.is_empty() {
        return Err(DatasetError::Empty);
    }
    let n = rows.len();
    let d = width.unwrap();
    let mut features = DMatrix::zeros(n, d);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            features[(i, j)] = *v;
        }
    }
    // z-score per column.
    for j in 0..d {
        let col = features.column(j);
        let mean = col.mean();
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        for i in 0..n {
            features[(i, j)] = if std > 0.0 {
                (features[(i, j)] - mean) / std
            } else {
                0.0
            };
        }
    }
    // Dense label ids in first-appearance order.
    let mut label_names: Vec<String> = Vec::new();
    let labels = labels_raw
        .into_iter()
        .map(|name| {
            match label_names.iter().position(|l| l == &name) {
                Some(id) => id,
                None => {
                    label_names.push(name);
                    label_names.len() - 1
                }
            }
        })
        .collect();
    Ok(LabeledDataset {
        features,
        labels,
        label_names,
    })
}

/// Writes features plus labels in the same accepted format (used by the
/// data generator CLI). Deterministic output.
pub fn format_keel_csv(features: &DMatrix<f64>, labels: &[usize]) -> String {
    let mut out = String::new();
    for i in 0..features.nrows() {
        for j in 0..features.ncols() {
            out.push_str(&format!("{}", features[(i, j)]));
            out.push(',');
        }
        out.push_str(&format!("class{}\n", labels[i]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_headers_and_zscores() {
        let text = "@relation toy\n@attribute a real\n@data\n1.0, 2.0, pos\n3.0, 2.0, neg\n5.0, 2.0, pos\n";
        let ds = parse_keel_csv(text).unwrap();
        assert_eq!(ds.features.nrows(), 3);
        assert_eq!(ds.num_classes(), 2);
        assert_eq!(ds.labels, vec![0, 1, 0]);
        // First column z-scored: mean 3, std sqrt(8/3).
        let std = (8.0f64 / 3.0).sqrt();
        assert!((ds.features[(0, 0)] + 2.0 / std).abs() < 1e-12);
        // Constant column maps to zero.
        assert_eq!(ds.features[(1, 1)], 0.0);
    }

    #[test]
    fn rejects_ragged_rows() {
        let text = "1.0, 2.0, a\n1.0, b\n";
        assert!(matches!(
            parse_keel_csv(text),
            Err(DatasetError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn round_trips_through_format() {
        let features = DMatrix::from_row_slice(2, 2, &[0.5, -1.0, 1.5, 2.0]);
        let text = format_keel_csv(&features, &[0, 1]);
        let ds = parse_keel_csv(&text).unwrap();
        assert_eq!(ds.labels, vec![0, 1]);
        assert_eq!(ds.features.nrows(), 2);
    }
}
