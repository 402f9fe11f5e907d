//! Two-group numeric tables from CSV.

use std::path::Path;

use balldiv::{DataMatrix, PooledSample};

use crate::error::{Error, Result};

/// Rows of a CSV file split by the value of one label column.
#[derive(Debug, Clone)]
pub struct LabeledData {
    /// Group label values in lexicographic order.
    pub labels: [String; 2],
    pub groups: [DataMatrix<f64>; 2],
    /// Names of the feature columns, in file order.
    pub features: Vec<String>,
}

impl LabeledData {
    pub fn dim(&self) -> usize {
        self.features.len()
    }

    /// First label's rows as the first sample.
    pub fn pooled(&self) -> Result<PooledSample<f64>> {
        Ok(PooledSample::new(self.groups[0].clone(), self.groups[1].clone())?)
    }
}

/// Reads a headered CSV. Every column except `label_column` must hold
/// finite reals; the label column must take exactly two distinct values.
pub fn load_csv(path: &Path, label_column: &str) -> Result<LabeledData> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: label_column.to_string(),
            available: header.join(", "),
        })?;
    let features: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    if features.is_empty() {
        return Err(Error::Config(format!("{}: no feature columns besides the label", path.display())));
    }

    let mut names: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut row_label: Vec<usize> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::Ragged {
                path: path.to_path_buf(),
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        let mut values = Vec::with_capacity(features.len());
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::BadCell {
                        path: path.to_path_buf(),
                        line,
                        column: col + 1,
                        name: header[col].clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        let label = &record[label_idx];
        let id = match names.iter().position(|n| n == label) {
            Some(id) => id,
            None => {
                names.push(label.to_string());
                names.len() - 1
            }
        };
        rows.push(values);
        row_label.push(id);
    }
    if rows.is_empty() {
        return Err(Error::NoDataRows {
            path: path.to_path_buf(),
        });
    }
    if names.len() != 2 {
        names.sort();
        return Err(Error::LabelCount {
            path: path.to_path_buf(),
            column: label_column.to_string(),
            found: names,
        });
    }

    // lexicographic label order fixes which group is the first sample
    let (first, second) = if names[0] <= names[1] { (0, 1) } else { (1, 0) };
    let group = |id: usize| -> Result<DataMatrix<f64>> {
        let picked: Vec<&Vec<f64>> = rows.iter().zip(&row_label).filter(|(_, &l)| l == id).map(|(r, _)| r).collect();
        Ok(DataMatrix::from_rows(&picked)?)
    };
    Ok(LabeledData {
        labels: [names[first].clone(), names[second].clone()],
        groups: [group(first)?, group(second)?],
        features,
    })
}
