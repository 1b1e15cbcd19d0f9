use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::seeded_rng;
use crate::error::{Error, Result};

/// Labels are digits; the l-cycle split is defined modulo this value.
pub const LABEL_MODULUS: usize = 10;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl RawDataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::contract(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y >= LABEL_MODULUS) {
            return Err(Error::contract(format!(
                "label {bad} outside 0..{LABEL_MODULUS}"
            )));
        }
        if let Some(w) = features.first().map(Vec::len) {
            if features.iter().any(|r| r.len() != w) {
                return Err(Error::contract("ragged feature matrix"));
            }
        }
        Ok(RawDataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    fn truncated(mut self, n: usize) -> Self {
        self.features.truncate(n);
        self.labels.truncate(n);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Isotropic Gaussian clusters, one per class, balanced labels.
    SyntheticBlobs {
        #[serde(default = "default_classes")]
        n_classes: usize,
        #[serde(default = "default_dim")]
        dim: usize,
        /// Standard deviation of the class centers around the origin.
        #[serde(default = "default_center_scale")]
        center_scale: f64,
        /// Within-class standard deviation.
        #[serde(default = "default_spread")]
        spread: f64,
    },
    /// Two classes split by a random hyperplane through the origin, with a
    /// gap of `margin` on each side.
    Separable {
        #[serde(default = "default_separable_dim")]
        dim: usize,
        #[serde(default = "default_margin")]
        margin: f64,
    },
    /// CSV with a header row and a `label` column. Without `test_path` the
    /// test rows are taken after the first `n_train` rows of `path`.
    Csv {
        path: PathBuf,
        #[serde(default)]
        test_path: Option<PathBuf>,
    },
}

fn default_classes() -> usize {
    10
}
fn default_dim() -> usize {
    784
}
fn default_center_scale() -> f64 {
    1.0
}
fn default_spread() -> f64 {
    1.0
}
fn default_separable_dim() -> usize {
    4
}
fn default_margin() -> f64 {
    0.1
}

impl DatasetSource {
    pub fn validate(&self) -> Result<()> {
        match self {
            DatasetSource::SyntheticBlobs {
                n_classes,
                dim,
                center_scale,
                spread,
            } => {
                if !(1..=LABEL_MODULUS).contains(n_classes) {
                    return Err(Error::config(
                        "dataset.source.n_classes",
                        format!("must be in 1..={LABEL_MODULUS}"),
                    ));
                }
                if *dim == 0 {
                    return Err(Error::config("dataset.source.dim", "must be positive"));
                }
                if !(*center_scale >= 0.0 && *spread > 0.0) {
                    return Err(Error::config(
                        "dataset.source.spread",
                        "spread must be positive and center_scale non-negative",
                    ));
                }
            }
            DatasetSource::Separable { dim, margin } => {
                if *dim == 0 {
                    return Err(Error::config("dataset.source.dim", "must be positive"));
                }
                if !(0.0..0.5).contains(margin) {
                    return Err(Error::config(
                        "dataset.source.margin",
                        "must be in [0, 0.5)",
                    ));
                }
            }
            DatasetSource::Csv { .. } => {}
        }
        Ok(())
    }

    pub fn n_classes(&self) -> Option<usize> {
        match self {
            DatasetSource::SyntheticBlobs { n_classes, .. } => Some(*n_classes),
            DatasetSource::Separable { .. } => Some(2),
            DatasetSource::Csv { .. } => None,
        }
    }
}

/// Loads `n_train` training and `n_test` test rows.
///
/// File sources keep the first rows in file order; requests beyond the
/// available rows are truncated with a warning. Synthetic sources are a pure
/// function of `seed`.
pub fn load_dataset(
    source: &DatasetSource,
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<(RawDataset, RawDataset)> {
    if n_train == 0 || n_test == 0 {
        return Err(Error::config(
            "dataset.n_train",
            "n_train and n_test must be at least 1",
        ));
    }
    source.validate()?;
    match source {
        DatasetSource::SyntheticBlobs {
            n_classes,
            dim,
            center_scale,
            spread,
        } => {
            let all = blobs(
                n_train + n_test,
                *n_classes,
                *dim,
                *center_scale,
                *spread,
                seed,
            )?;
            Ok(split_at(all, n_train))
        }
        DatasetSource::Separable { dim, margin } => {
            let all = separable(n_train + n_test, *dim, *margin, seed)?;
            Ok(split_at(all, n_train))
        }
        DatasetSource::Csv { path, test_path } => match test_path {
            Some(tp) => {
                let train = read_csv(path)?;
                let test = read_csv(tp)?;
                Ok((take(train, n_train, path), take(test, n_test, tp)))
            }
            None => {
                let all = read_csv(path)?;
                let available = all.len();
                if available < 2 {
                    return Err(Error::Load {
                        path: path.display().to_string(),
                        reason: "need at least two rows to form train and test sets".into(),
                    });
                }
                let n_tr = n_train.min(available - 1);
                if n_tr < n_train {
                    log::warn!(
                        "{}: only {available} rows, n_train truncated to {n_tr}",
                        path.display()
                    );
                }
                let (train, rest) = split_at(all, n_tr);
                Ok((train, take(rest, n_test, path)))
            }
        },
    }
}

fn take(data: RawDataset, n: usize, path: &std::path::Path) -> RawDataset {
    if data.len() < n {
        log::warn!(
            "{}: requested {n} rows but only {} available",
            path.display(),
            data.len()
        );
    }
    data.truncated(n)
}

fn split_at(mut all: RawDataset, n: usize) -> (RawDataset, RawDataset) {
    let test_features = all.features.split_off(n);
    let test_labels = all.labels.split_off(n);
    (
        all,
        RawDataset {
            features: test_features,
            labels: test_labels,
        },
    )
}

fn read_csv(path: &std::path::Path) -> Result<RawDataset> {
    let load_err = |reason: String| Error::Load {
        path: path.display().to_string(),
        reason,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| load_err(e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| load_err(e.to_string()))?
        .clone();
    let label_col = headers
        .iter()
        .position(|h| h.trim() == "label")
        .ok_or_else(|| load_err("no `label` column".into()))?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| load_err(e.to_string()))?;
        let mut x = Vec::with_capacity(record.len().saturating_sub(1));
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| load_err(format!("row {}: non-numeric value `{field}`", row + 1)))?;
            if col == label_col {
                if v < 0.0 || v.fract() != 0.0 || v >= LABEL_MODULUS as f64 {
                    return Err(load_err(format!("row {}: invalid label {v}", row + 1)));
                }
                labels.push(v as usize);
            } else {
                x.push(v);
            }
        }
        features.push(x);
    }
    RawDataset::new(features, labels).map_err(|e| load_err(e.to_string()))
}

fn blobs(
    n: usize,
    n_classes: usize,
    dim: usize,
    center_scale: f64,
    spread: f64,
    seed: u64,
) -> Result<RawDataset> {
    let mut rng = seeded_rng(seed);
    let center_dist = Normal::new(0.0, center_scale.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::config("dataset.source.center_scale", e.to_string()))?;
    let noise = Normal::new(0.0, spread)
        .map_err(|e| Error::config("dataset.source.spread", e.to_string()))?;
    let centers: Vec<Vec<f64>> = (0..n_classes)
        .map(|_| (0..dim).map(|_| center_dist.sample(&mut rng)).collect())
        .collect();
    let mut labels: Vec<usize> = (0..n).map(|i| i % n_classes).collect();
    labels.shuffle(&mut rng);
    let features = labels
        .iter()
        .map(|&y| {
            centers[y]
                .iter()
                .map(|c| c + noise.sample(&mut rng))
                .collect()
        })
        .collect();
    RawDataset::new(features, labels)
}

fn separable(n: usize, dim: usize, margin: f64, seed: u64) -> Result<RawDataset> {
    let mut rng = seeded_rng(seed);
    let gauss = Normal::new(0.0, 1.0).expect("unit normal");
    let mut w: Vec<f64> = (0..dim).map(|_| gauss.sample(&mut rng)).collect();
    let norm = w
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    w.iter_mut().for_each(|v| *v /= norm);
    let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while features.len() < n {
        let x: Vec<f64> = (0..dim).map(|_| unit.sample(&mut rng)).collect();
        let s: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        if s.abs() < margin {
            continue;
        }
        labels.push(usize::from(s > 0.0));
        features.push(x);
    }
    RawDataset::new(features, labels)
}
