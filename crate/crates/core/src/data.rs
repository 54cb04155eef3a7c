//! Tabular datasets: CSV ingestion, seeded train/test splitting and
//! train-derived min-max normalization.
//!
//! A [`Dataset`] is an immutable M×N matrix of finite reals stored row-major,
//! a label per row, and a side table mapping class ids back to the original
//! label strings.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("file has no header line")]
    MissingHeader,
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column} ({name}): `{value}` is not a number")]
    NonNumeric {
        line: usize,
        column: usize,
        name: String,
        value: String,
    },
    #[error("line {line}, column {column} ({name}): non-finite value `{value}`")]
    NonFinite {
        line: usize,
        column: usize,
        name: String,
        value: String,
    },
    #[error("class column `{0}` not found")]
    UnknownClassColumn(String),
    #[error("need at least one feature column besides the class column")]
    NoFeatures,
    #[error("need at least 2 instances, found {0}")]
    TooFewInstances(usize),
    #[error("single-class dataset: classification is undefined")]
    SingleClass,
    #[error("feature matrix has {values} values, not {rows}×{cols}")]
    Shape {
        values: usize,
        rows: usize,
        cols: usize,
    },
    #[error("label {label} out of range for {class_count} classes")]
    LabelOutOfRange { label: usize, class_count: usize },
    #[error("class {0} has no instances")]
    EmptyClass(usize),
    #[error("train fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
    #[error("train fraction {fraction} on {rows} instances leaves an empty {side} partition")]
    EmptyPartition {
        fraction: f64,
        rows: usize,
        side: &'static str,
    },
    #[error("stratification impossible: class `{0}` cannot appear in both partitions")]
    StratificationImpossible(String),
    #[error("dimension mismatch: expected {expected} features, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Column holding the class label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl ClassColumn {
    /// Parses a CLI selector: a 0-based index if numeric, otherwise a header name.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => ClassColumn::Index(i),
            Err(_) if s == "last" => ClassColumn::Last,
            Err(_) => ClassColumn::Name(s.to_string()),
        }
    }

    fn resolve(&self, header: &[String]) -> Result<usize, DataError> {
        match self {
            ClassColumn::Last => Ok(header.len() - 1),
            ClassColumn::Index(i) if *i < header.len() => Ok(*i),
            ClassColumn::Index(i) => Err(DataError::UnknownClassColumn(i.to_string())),
            ClassColumn::Name(n) => header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| DataError::UnknownClassColumn(n.clone())),
        }
    }
}

impl fmt::Display for ClassColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassColumn::Last => write!(f, "last"),
            ClassColumn::Index(i) => write!(f, "{i}"),
            ClassColumn::Name(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextFormat {
    #[default]
    Csv,
    /// Whitespace-delimited columns, header on the first line.
    Space,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    values: Vec<f64>,
    n_rows: usize,
    n_features: usize,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from row-major values, checking every invariant:
    /// at least 2 rows and 1 feature, finite values, and every class in
    /// `class_names` present at least once.
    pub fn new(
        values: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self, DataError> {
        if n_features == 0 {
            return Err(DataError::NoFeatures);
        }
        let n_rows = labels.len();
        if values.len() != n_rows * n_features {
            return Err(DataError::Shape {
                values: values.len(),
                rows: n_rows,
                cols: n_features,
            });
        }
        if n_rows < 2 {
            return Err(DataError::TooFewInstances(n_rows));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                line: pos / n_features,
                column: pos % n_features,
                name: feature_names.get(pos % n_features).cloned().unwrap_or_default(),
                value: values[pos].to_string(),
            });
        }
        if feature_names.len() != n_features {
            return Err(DataError::DimensionMismatch {
                expected: n_features,
                found: feature_names.len(),
            });
        }
        let class_count = class_names.len();
        let mut seen = vec![false; class_count];
        for &l in &labels {
            if l >= class_count {
                return Err(DataError::LabelOutOfRange {
                    label: l,
                    class_count,
                });
            }
            seen[l] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(DataError::EmptyClass(c));
        }
        if class_count < 2 {
            return Err(DataError::SingleClass);
        }
        Ok(Self {
            values,
            n_rows,
            n_features,
            labels,
            feature_names,
            class_names,
        })
    }

    /// Convenience constructor from rows and string-free labels. Classes are
    /// named by their id.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[usize]) -> Result<Self, DataError> {
        let n_features = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != n_features) {
            return Err(DataError::Ragged {
                line: r,
                expected: n_features,
                found: rows[r].len(),
            });
        }
        let class_count = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(
            rows.concat(),
            n_features,
            labels.to_vec(),
            (0..n_features).map(|j| format!("f{j}")).collect(),
            (0..class_count).map(|c| c.to_string()).collect(),
        )
    }

    /// Partition constructor: shares the parent's class table, skips the
    /// class-presence and minimum-size checks a loaded dataset must pass.
    fn subset(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.n_features);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Self {
            values,
            n_rows: rows.len(),
            n_features: self.n_features,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// Rows `rows` of this dataset, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        self.subset(rows)
    }

    /// Projects onto `columns` in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self, DataError> {
        if columns.is_empty() {
            return Err(DataError::NoFeatures);
        }
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.n_features) {
            return Err(DataError::DimensionMismatch {
                expected: self.n_features,
                found: bad + 1,
            });
        }
        let mut values = Vec::with_capacity(self.n_rows * columns.len());
        for r in 0..self.n_rows {
            let row = self.row(r);
            values.extend(columns.iter().map(|&c| row[c]));
        }
        Ok(Self {
            values,
            n_rows: self.n_rows,
            n_features: columns.len(),
            labels: self.labels.clone(),
            feature_names: columns
                .iter()
                .map(|&c| self.feature_names[c].clone())
                .collect(),
            class_names: self.class_names.clone(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_features)
    }

    /// Row-major feature values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// All columns, i.e. the transposed matrix.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        let mut cols = vec![Vec::with_capacity(self.n_rows); self.n_features];
        for row in self.rows() {
            for (c, &v) in cols.iter_mut().zip(row) {
                c.push(v);
            }
        }
        cols
    }

    /// Instances per class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Class ids as reals, the encoding used for linear C-correlation.
    pub fn labels_as_f64(&self) -> Vec<f64> {
        self.labels.iter().map(|&l| l as f64).collect()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Loads a headed table. The class column is removed from the features and
/// its values are mapped to contiguous ids in first-appearance order.
pub fn load_csv(
    path: impl AsRef<Path>,
    class_column: &ClassColumn,
    format: TextFormat,
) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_table(&text, class_column, format)
}

/// Parses table text; `load_csv` without the file system.
pub fn parse_table(
    text: &str,
    class_column: &ClassColumn,
    format: TextFormat,
) -> Result<Dataset, DataError> {
    let records: Vec<(usize, Vec<String>)> = match format {
        TextFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            let mut out = Vec::new();
            for rec in reader.records() {
                let rec = rec?;
                let line = rec.position().map_or(0, |p| p.line() as usize);
                if rec.len() == 1 && rec[0].is_empty() {
                    continue;
                }
                out.push((line, rec.iter().map(str::to_string).collect()));
            }
            out
        }
        TextFormat::Space => text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| (i + 1, l.split_whitespace().map(str::to_string).collect()))
            .collect(),
    };

    let mut iter = records.into_iter();
    let (_, header) = iter.next().ok_or(DataError::MissingHeader)?;
    let class_idx = class_column.resolve(&header)?;
    let arity = header.len();
    if arity < 2 {
        return Err(DataError::NoFeatures);
    }
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != class_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    for (line, fields) in iter {
        if fields.len() != arity {
            return Err(DataError::Ragged {
                line,
                expected: arity,
                found: fields.len(),
            });
        }
        for (col, cell) in fields.iter().enumerate() {
            if col == class_idx {
                let next = class_names.len();
                let id = *class_ids.entry(cell.clone()).or_insert_with(|| {
                    class_names.push(cell.clone());
                    next
                });
                labels.push(id);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| DataError::NonNumeric {
                line,
                column: col,
                name: header[col].clone(),
                value: cell.clone(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFinite {
                    line,
                    column: col,
                    name: header[col].clone(),
                    value: cell.clone(),
                });
            }
            values.push(v);
        }
    }
    if labels.len() >= 2 && class_names.len() < 2 {
        return Err(DataError::SingleClass);
    }
    Dataset::new(values, arity - 1, labels, feature_names, class_names)
}

/// Writes the dataset as CSV with the class column last. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv(d: &Dataset, mut out: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(&mut out);
    let mut header: Vec<&str> = d.feature_names.iter().map(String::as_str).collect();
    header.push("class");
    w.write_record(&header)?;
    for (row, &label) in d.rows().zip(&d.labels) {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(d.class_names[label].clone());
        w.write_record(&rec)?;
    }
    w.flush()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        Self {
            train_fraction,
            seed,
            stratified: false,
        }
    }
}

/// Index-level split: returns (train rows, test rows).
pub fn split_indices(d: &Dataset, s: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    let m = d.n_rows();
    let f = s.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(DataError::BadFraction(f));
    }
    let n_train = (f * m as f64).round() as usize;
    if n_train == 0 || n_train >= m {
        return Err(DataError::EmptyPartition {
            fraction: f,
            rows: m,
            side: if n_train == 0 { "train" } else { "test" },
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    if !s.stratified {
        let mut idx: Vec<usize> = (0..m).collect();
        idx.shuffle(&mut rng);
        let test = idx.split_off(n_train);
        return Ok((idx, test));
    }

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); d.class_count()];
    for (i, &l) in d.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    for (c, rows) in by_class.iter().enumerate() {
        if rows.len() == 1 {
            return Err(DataError::StratificationImpossible(d.class_names()[c].clone()));
        }
    }
    let quotas = stratified_quotas(&by_class, f, n_train)
        .map_err(|c| DataError::StratificationImpossible(d.class_names()[c].clone()))?;
    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(m - n_train);
    for (rows, quota) in by_class.iter_mut().zip(quotas) {
        rows.shuffle(&mut rng);
        train.extend_from_slice(&rows[..quota]);
        test.extend_from_slice(&rows[quota..]);
    }
    Ok((train, test))
}

/// Largest-remainder apportionment of `n_train` slots across classes,
/// repaired so every non-empty class keeps at least one row on each side.
/// On failure returns the offending class id.
fn stratified_quotas(by_class: &[Vec<usize>], f: f64, n_train: usize) -> Result<Vec<usize>, usize> {
    let exact: Vec<f64> = by_class.iter().map(|r| f * r.len() as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut remaining = n_train - quotas.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..by_class.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &c in order.iter().cycle().take(order.len() * 2) {
        if remaining == 0 {
            break;
        }
        if quotas[c] < by_class[c].len() {
            quotas[c] += 1;
            remaining -= 1;
        }
    }
    for c in 0..by_class.len() {
        let size = by_class[c].len();
        if size == 0 {
            continue;
        }
        if quotas[c] == 0 {
            let donor = (0..by_class.len())
                .filter(|&o| quotas[o] >= 2)
                .max_by_key(|&o| (quotas[o], std::cmp::Reverse(o)))
                .ok_or(c)?;
            quotas[donor] -= 1;
            quotas[c] += 1;
        } else if quotas[c] == size {
            let donor = (0..by_class.len())
                .filter(|&o| by_class[o].len() - quotas[o] >= 2)
                .max_by_key(|&o| (by_class[o].len() - quotas[o], std::cmp::Reverse(o)))
                .ok_or(c)?;
            quotas[donor] += 1;
            quotas[c] -= 1;
        }
    }
    Ok(quotas)
}

/// Splits into (train, test). Deterministic for a fixed seed.
pub fn split(d: &Dataset, s: &SplitSpec) -> Result<(Dataset, Dataset), DataError> {
    let (train, test) = split_indices(d, s)?;
    Ok((d.subset(&train), d.subset(&test)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_normalizer(train: &Dataset) -> NormalizationParams {
    let n = train.n_features();
    let mut min = vec![f64::INFINITY; n];
    let mut max = vec![f64::NEG_INFINITY; n];
    for row in train.rows() {
        for j in 0..n {
            min[j] = min[j].min(row[j]);
            max[j] = max[j].max(row[j]);
        }
    }
    NormalizationParams { min, max }
}

impl NormalizationParams {
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 })
            .collect()
    }
}

/// Affine min-max map per feature. Constant training features map to 0.5;
/// values outside the training range are not clipped.
pub fn apply_normalizer(d: &Dataset, p: &NormalizationParams) -> Result<Dataset, DataError> {
    if p.min.len() != d.n_features() {
        return Err(DataError::DimensionMismatch {
            expected: p.min.len(),
            found: d.n_features(),
        });
    }
    let values = d.rows().flat_map(|r| p.transform_row(r)).collect();
    Ok(Dataset {
        values,
        ..d.clone()
    })
}
