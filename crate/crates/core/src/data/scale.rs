use rand::seq::SliceRandom;

use super::seeded_rng;
use crate::error::{Error, Result};

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl StandardScaler {
    pub fn fit(x: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = x.first() else {
            return Err(Error::contract("cannot fit a scaler on zero rows"));
        };
        let d = first.len();
        let m = x.len() as f64;
        let mut mean = vec![0.0; d];
        for row in x {
            for (acc, v) in mean.iter_mut().zip(row) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m);
        let mut var = vec![0.0; d];
        for row in x {
            for ((acc, v), mu) in var.iter_mut().zip(row).zip(&mean) {
                *acc += (v - mu) * (v - mu);
            }
        }
        let std = var.into_iter().map(|v| (v / m).sqrt()).collect();
        Ok(StandardScaler { mean, std })
    }

    /// Zero-variance features map to 0.
    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|row| {
                row.iter()
                    .zip(&self.mean)
                    .zip(&self.std)
                    .map(|((v, mu), sd)| if *sd > 0.0 { (v - mu) / sd } else { 0.0 })
                    .collect()
            })
            .collect()
    }
}

/// Fits on `train` and applies the same statistics to both matrices.
pub fn standardize(
    train: &[Vec<f64>],
    test: &[Vec<f64>],
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, StandardScaler)> {
    let scaler = StandardScaler::fit(train)?;
    Ok((scaler.transform(train), scaler.transform(test), scaler))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = x.first() else {
            return Err(Error::contract("cannot fit a scaler on zero rows"));
        };
        let mut min = first.clone();
        let mut max = first.clone();
        for row in &x[1..] {
            for (i, &v) in row.iter().enumerate() {
                min[i] = min[i].min(v);
                max[i] = max[i].max(v);
            }
        }
        Ok(MinMaxScaler { min, max })
    }

    /// Maps the fitted range onto [0, 1]; constant features become 0.
    /// Values outside the fitted range are clipped.
    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|row| {
                row.iter()
                    .zip(self.min.iter().zip(&self.max))
                    .map(|(v, (lo, hi))| {
                        let span = hi - lo;
                        if span > 0.0 {
                            ((v - lo) / span).clamp(0.0, 1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Seeded shuffled split with `round(alpha · m)` training rows.
#[allow(clippy::type_complexity)]
pub fn train_validation_split<T: Clone>(
    x: &[Vec<f64>],
    y: &[T],
    alpha: f64,
    seed: u64,
) -> Result<((Vec<Vec<f64>>, Vec<T>), (Vec<Vec<f64>>, Vec<T>))> {
    if x.len() != y.len() {
        return Err(Error::contract("feature and label counts differ"));
    }
    let m = x.len();
    if m < 2 {
        return Err(Error::contract(format!("cannot split {m} rows")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::config(
            "dataset.validation_split",
            "must lie in (0, 1)",
        ));
    }
    let n_train = (alpha * m as f64).round() as usize;
    if n_train == 0 || n_train == m {
        return Err(Error::contract(format!(
            "split of {m} rows at {alpha} leaves an empty side"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut seeded_rng(seed));
    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<T>) {
        (
            idx.iter().map(|&i| x[i].clone()).collect(),
            idx.iter().map(|&i| y[i].clone()).collect(),
        )
    };
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}
