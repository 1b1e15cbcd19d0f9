use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Projection onto the top-`k` eigenvectors of the training covariance.
///
/// Each component is sign-normalized so that its largest-magnitude entry is
/// positive (first such entry on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k` rows of length `d`, orthonormal.
    pub components: Vec<Vec<f64>>,
    /// Covariance eigenvalues for the kept components, non-increasing.
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn fit(x: &[Vec<f64>], k: usize) -> Result<Self> {
        let m = x.len();
        let d = x.first().map_or(0, Vec::len);
        if k == 0 || k > m.min(d) {
            return Err(Error::config(
                "dataset.pca_components",
                format!("k = {k} must be in 1..={}", m.min(d)),
            ));
        }
        let mut mean = vec![0.0; d];
        for row in x {
            for (acc, v) in mean.iter_mut().zip(row) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m as f64);

        let centered = DMatrix::from_fn(m, d, |i, j| x[i][j] - mean[j]);
        let denom = if m > 1 { (m - 1) as f64 } else { 1.0 };
        let cov = (centered.transpose() * &centered) / denom;
        let eig = SymmetricEigen::new(cov);

        let mut order: Vec<usize> = (0..d).collect();
        // stable sort keeps eigen-solver order among equal eigenvalues
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let mut components = Vec::with_capacity(k);
        let mut explained_variance = Vec::with_capacity(k);
        for &idx in order.iter().take(k) {
            let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
            let mut pivot = 0;
            for (i, val) in v.iter().enumerate() {
                if val.abs() > v[pivot].abs() {
                    pivot = i;
                }
            }
            if v[pivot] < 0.0 {
                v.iter_mut().for_each(|c| *c = -*c);
            }
            components.push(v);
            explained_variance.push(eig.eigenvalues[idx].max(0.0));
        }
        Ok(PcaModel {
            mean,
            components,
            explained_variance,
        })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let d = self.mean.len();
        x.iter()
            .map(|row| {
                if row.len() != d {
                    return Err(Error::contract(format!(
                        "PCA fitted on {d} features, got {}",
                        row.len()
                    )));
                }
                Ok(self
                    .components
                    .iter()
                    .map(|c| {
                        c.iter()
                            .zip(row.iter().zip(&self.mean))
                            .map(|(w, (v, mu))| w * (v - mu))
                            .sum()
                    })
                    .collect())
            })
            .collect()
    }
}
