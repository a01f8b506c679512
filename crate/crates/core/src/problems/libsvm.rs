use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, streams};

/// Sparse feature vector with 0-based, strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRow {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseRow {
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.indices.iter().zip(&self.values).map(|(&i, v)| v * dense[i]).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LibsvmDataset {
    pub name: String,
    pub num_features: usize,
    pub rows: Vec<SparseRow>,
    /// `±1`
    pub labels: Vec<f64>,
}

impl LibsvmDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Fraction of `+1` labels.
    pub fn positive_fraction(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|l| **l > 0.0).count() as f64 / self.labels.len() as f64
    }

    /// The first `k` rows (all of them when `k ≥ N`).
    pub fn subset(&self, k: usize) -> Self {
        let k = k.min(self.len());
        Self {
            name: format!("{}[..{k}]", self.name),
            num_features: self.num_features,
            rows: self.rows[..k].to_vec(),
            labels: self.labels[..k].to_vec(),
        }
    }

    /// Concatenates another dataset (e.g. train and test splits).
    pub fn concat(mut self, other: Self) -> Self {
        self.num_features = self.num_features.max(other.num_features);
        self.rows.extend(other.rows);
        self.labels.extend(other.labels);
        self
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn parse_libsvm(path: impl AsRef<Path>) -> Result<LibsvmDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_with_origin(&text, &name, path)
}

/// Parses LIBSVM text held in memory; `name` labels errors and the dataset.
pub fn parse_libsvm_str(text: &str, name: &str) -> Result<LibsvmDataset> {
    parse_with_origin(text, name, &PathBuf::from(name))
}

fn parse_with_origin(text: &str, name: &str, origin: &Path) -> Result<LibsvmDataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut num_features = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(origin, lineno, format!("bad label `{label_tok}`")))?;
        let mut row = SparseRow::default();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(origin, lineno, format!("expected idx:val, got `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(origin, lineno, format!("bad index in `{tok}`")))?;
            if idx == 0 {
                return Err(parse_err(origin, lineno, "feature indices start at 1"));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(origin, lineno, format!("bad value in `{tok}`")))?;
            if let Some(&last) = row.indices.last() {
                if idx - 1 <= last {
                    return Err(parse_err(origin, lineno, format!("index {idx} is not increasing")));
                }
            }
            row.indices.push(idx - 1);
            row.values.push(val);
            num_features = num_features.max(idx);
        }
        labels.push(if label > 0.0 { 1.0 } else { -1.0 });
        rows.push(row);
    }
    Ok(LibsvmDataset {
        name: name.to_string(),
        num_features,
        rows,
        labels,
    })
}

/// Per-feature ranges recorded by [`scale_features`], written as a JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingMeta {
    pub mins: Vec<f64>,
    pub maxes: Vec<f64>,
    pub p_hat: f64,
    pub rows: usize,
    pub features: usize,
}

/// Min-max scales every feature into `[0, 1]`; constant features map to 0.
/// Absent entries count as zeros.
pub fn scale_features(ds: &LibsvmDataset) -> Result<(LibsvmDataset, ScalingMeta)> {
    if ds.is_empty() {
        return Err(Error::Empty("cannot scale an empty dataset"));
    }
    let d = ds.num_features;
    let mut mins = vec![f64::INFINITY; d];
    let mut maxes = vec![f64::NEG_INFINITY; d];
    let mut counts = vec![0usize; d];
    for row in &ds.rows {
        for (&i, &v) in row.indices.iter().zip(&row.values) {
            mins[i] = mins[i].min(v);
            maxes[i] = maxes[i].max(v);
            counts[i] += 1;
        }
    }
    for j in 0..d {
        if counts[j] < ds.len() {
            mins[j] = mins[j].min(0.0);
            maxes[j] = maxes[j].max(0.0);
        }
        if counts[j] == 0 {
            mins[j] = 0.0;
            maxes[j] = 0.0;
        }
    }
    let map = |j: usize, v: f64| {
        let span = maxes[j] - mins[j];
        if span > 0.0 {
            ((v - mins[j]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        }
    };
    let rows = ds
        .rows
        .iter()
        .map(|row| {
            let mut dense = vec![0.0; d];
            for j in 0..d {
                dense[j] = map(j, 0.0);
            }
            for (&i, &v) in row.indices.iter().zip(&row.values) {
                dense[i] = map(i, v);
            }
            let mut out = SparseRow::default();
            for (j, v) in dense.into_iter().enumerate() {
                if v != 0.0 {
                    out.indices.push(j);
                    out.values.push(v);
                }
            }
            out
        })
        .collect();
    let scaled = LibsvmDataset {
        name: ds.name.clone(),
        num_features: d,
        rows,
        labels: ds.labels.clone(),
    };
    let meta = ScalingMeta {
        mins,
        maxes,
        p_hat: ds.positive_fraction(),
        rows: ds.len(),
        features: d,
    };
    Ok((scaled, meta))
}

/// Writes LIBSVM text plus, when `meta` is given, a `<path>.meta.json` sidecar.
pub fn write_libsvm(ds: &LibsvmDataset, path: impl AsRef<Path>, meta: Option<&ScalingMeta>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut text = String::new();
    for (row, label) in ds.rows.iter().zip(&ds.labels) {
        text.push_str(if *label > 0.0 { "+1" } else { "-1" });
        for (&i, &v) in row.indices.iter().zip(&row.values) {
            write!(text, " {}:{}", i + 1, v).expect("write to String");
        }
        text.push('\n');
    }
    std::fs::write(path, text).map_err(io_err)?;
    if let Some(meta) = meta {
        let mut side = path.as_os_str().to_owned();
        side.push(".meta.json");
        let side = PathBuf::from(side);
        let json = serde_json::to_string_pretty(meta)?;
        std::fs::write(&side, json).map_err(|source| Error::Io { path: side, source })?;
    }
    Ok(())
}

/// Feature-group sizes of a one-hot encoded census table with 123 columns.
const GROUPS: [usize; 14] = [5, 8, 5, 16, 16, 7, 14, 6, 5, 2, 2, 2, 3, 32];

/// Seeded stand-in shaped like a9a: 123 binary features in 14 one-hot groups
/// (14 active per row) and roughly 24% positive labels.
pub fn synthetic_a9a_like(rows: usize, seed: u64) -> LibsvmDataset {
    let mut rng = stream(seed, streams::DATASET);
    let d: usize = GROUPS.iter().sum();
    let weights: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let mut data = Vec::with_capacity(rows);
    let mut scores = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut row = SparseRow::default();
        let mut offset = 0;
        for &g in &GROUPS {
            // skewed category frequencies, as in real census columns
            let u: f64 = rng.gen_range(0.0..1.0);
            let pick = ((u * u) * g as f64) as usize;
            row.indices.push(offset + pick.min(g - 1));
            row.values.push(1.0);
            offset += g;
        }
        let noise: f64 = rng.gen_range(-1.5..=1.5);
        scores.push(row.indices.iter().map(|&i| weights[i]).sum::<f64>() + noise);
        data.push(row);
    }
    let mut sorted = scores.clone();
    sorted.sort_by(f64::total_cmp);
    let cut = sorted
        .get(((rows as f64) * 0.76) as usize)
        .copied()
        .unwrap_or(f64::INFINITY);
    let labels = scores.iter().map(|s| if *s >= cut { 1.0 } else { -1.0 }).collect();
    LibsvmDataset {
        name: "synthetic-a9a".to_string(),
        num_features: d,
        rows: data,
        labels,
    }
}
