use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A dense feature matrix with optional categorical labels.
///
/// Features are stored row-major. Label codes are dense in `0..label_names.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    n_rows: usize,
    feature_names: Vec<String>,
    labels: Option<Vec<usize>>,
    label_names: Vec<String>,
    label_column: Option<String>,
}

impl LabeledDataset {
    /// Builds a labeled dataset. `features` is row-major with `feature_names.len()` columns.
    pub fn new(
        features: Vec<f64>,
        feature_names: Vec<String>,
        labels: Vec<usize>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let ds = Self::from_parts(features, feature_names, Some(labels), label_names, None)?;
        Ok(ds)
    }

    /// Builds a dataset with no labels; usable only for evaluation.
    pub fn unlabeled(features: Vec<f64>, feature_names: Vec<String>) -> Result<Self> {
        Self::from_parts(features, feature_names, None, Vec::new(), None)
    }

    pub(crate) fn from_parts(
        features: Vec<f64>,
        feature_names: Vec<String>,
        labels: Option<Vec<usize>>,
        label_names: Vec<String>,
        label_column: Option<String>,
    ) -> Result<Self> {
        let d = feature_names.len();
        if d == 0 {
            return Err(Error::Data("dataset has no feature columns".into()));
        }
        if !features.len().is_multiple_of(d) {
            return Err(Error::Data(format!(
                "feature buffer of length {} is not a multiple of {d} columns",
                features.len()
            )));
        }
        let n_rows = features.len() / d;
        if n_rows == 0 {
            return Err(Error::Data("dataset has no rows".into()));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite feature value at row {}, column '{}'",
                pos / d + 1,
                feature_names[pos % d]
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != n_rows {
                return Err(Error::Data(format!(
                    "{} labels for {n_rows} rows",
                    labels.len()
                )));
            }
            if let Some(&bad) = labels.iter().find(|&&l| l >= label_names.len()) {
                return Err(Error::Data(format!(
                    "label code {bad} outside 0..{}",
                    label_names.len()
                )));
            }
        }
        Ok(Self {
            features,
            n_rows,
            feature_names,
            labels,
            label_names,
            label_column,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Number of label classes (length of `label_names`).
    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.features[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.features[row * self.n_features() + feature]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn label_column(&self) -> Option<&str> {
        self.label_column.as_deref()
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    pub(crate) fn require_labels(&self) -> Result<&[usize]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::Fit("dataset has no labels".into()))
    }

    /// Per-class counts over all rows.
    pub fn class_counts(&self) -> Result<Vec<usize>> {
        let labels = self.require_labels()?;
        let mut counts = vec![0; self.n_classes()];
        for &l in labels {
            counts[l] += 1;
        }
        Ok(counts)
    }

    /// A copy with labels replaced, keeping names.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        Self::from_parts(
            self.features.clone(),
            self.feature_names.clone(),
            Some(labels),
            self.label_names.clone(),
            self.label_column.clone(),
        )
    }

    /// A copy restricted to the given feature columns, in the given order.
    pub fn select_features(&self, columns: &[usize]) -> Result<Self> {
        let d = self.n_features();
        if let Some(&bad) = columns.iter().find(|&&c| c >= d) {
            return Err(Error::Input(format!(
                "feature index {bad} out of range 0..{d}"
            )));
        }
        let mut features = Vec::with_capacity(self.n_rows * columns.len());
        for i in 0..self.n_rows {
            let row = self.row(i);
            features.extend(columns.iter().map(|&c| row[c]));
        }
        Self::from_parts(
            features,
            columns
                .iter()
                .map(|&c| self.feature_names[c].clone())
                .collect(),
            self.labels.clone(),
            self.label_names.clone(),
            self.label_column.clone(),
        )
    }

    /// Resolves feature names to column indices.
    pub fn feature_indices<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|name| {
                let name = name.as_ref();
                self.feature_names
                    .iter()
                    .position(|f| f == name)
                    .ok_or_else(|| Error::Input(format!("unknown feature '{name}'")))
            })
            .collect()
    }

    /// A copy containing only the given rows.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(rows.len() * self.n_features());
        for &r in rows {
            features.extend_from_slice(self.row(r));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| rows.iter().map(|&r| l[r]).collect());
        Self::from_parts(
            features,
            self.feature_names.clone(),
            labels,
            self.label_names.clone(),
            self.label_column.clone(),
        )
    }
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    let trimmed = cell.trim();
    // f64::from_str accepts "NaN"/"inf"; those are rejected below.
    let v: f64 = trimmed.parse().map_err(|_| {
        Error::Data(format!(
            "non-numeric value '{trimmed}' at row {row}, column '{column}'"
        ))
    })?;
    if !v.is_finite() {
        return Err(Error::Data(format!(
            "non-finite value '{trimmed}' at row {row}, column '{column}'"
        )));
    }
    Ok(v)
}

/// Loads a headered CSV. When `label_column` names an existing column its
/// cells become class labels, encoded densely in first-appearance order;
/// otherwise every column is a feature and the dataset is unlabeled.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Data(format!("{}: empty file", path.display())));
    }
    let label_idx = label_column.and_then(|name| headers.iter().position(|h| h == name));
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&c| Some(c) != label_idx)
        .collect();
    let feature_names: Vec<String> = feature_cols
        .iter()
        .map(|&c| headers[c].to_string())
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut label_names: Vec<String> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let row = i + 1;
        if record.len() != headers.len() {
            return Err(Error::Data(format!(
                "row {row} has {} cells, expected {}",
                record.len(),
                headers.len()
            )));
        }
        for &c in &feature_cols {
            features.push(parse_cell(&record[c], row, &headers[c])?);
        }
        if let Some(li) = label_idx {
            let name = &record[li];
            let code = match label_names.iter().position(|l| l == name) {
                Some(code) => code,
                None => {
                    label_names.push(name.to_string());
                    label_names.len() - 1
                }
            };
            labels.push(code);
        }
    }
    if features.is_empty() && labels.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    let (labels, label_column) = match label_idx {
        Some(li) => (Some(labels), Some(headers[li].to_string())),
        None => (None, None),
    };
    LabeledDataset::from_parts(features, feature_names, labels, label_names, label_column)
}

/// Writes the dataset as CSV: feature columns in order, then the label column
/// (named after the loaded column, or `y`). Values use the shortest
/// representation that round-trips exactly.
pub fn save_csv(data: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv(data, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv<W: Write + ?Sized>(data: &LabeledDataset, out: &mut W) -> std::io::Result<()> {
    let mut header = data.feature_names().join(",");
    if data.is_labeled() {
        header.push(',');
        header.push_str(data.label_column().unwrap_or("y"));
    }
    writeln!(out, "{header}")?;
    let mut line = String::new();
    for i in 0..data.n_rows() {
        line.clear();
        for (j, v) in data.row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        if let Some(labels) = data.labels() {
            line.push(',');
            line.push_str(&data.label_names()[labels[i]]);
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
