use std::collections::VecDeque;

use super::{squared_distance, Clusterer};
use crate::error::Result;

/// Density clustering; noise rows get label −1. Neighborhoods are closed
/// balls and include the row itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dbscan {
    pub eps: f64,
    pub min_samples: usize,
}

impl Clusterer for Dbscan {
    fn fit_predict(&self, rows: &[Vec<f64>]) -> Result<Vec<i64>> {
        let n = rows.len();
        let eps2 = self.eps * self.eps;
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| squared_distance(&rows[i], &rows[j]) <= eps2)
                    .collect()
            })
            .collect();
        let core: Vec<bool> = neighbors
            .iter()
            .map(|nb| nb.len() >= self.min_samples)
            .collect();

        let mut labels = vec![-1i64; n];
        let mut next = 0i64;
        for start in 0..n {
            if !core[start] || labels[start] >= 0 {
                continue;
            }
            labels[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(p) = queue.pop_front() {
                if !core[p] {
                    continue;
                }
                for &q in &neighbors[p] {
                    if labels[q] < 0 {
                        labels[q] = next;
                        queue.push_back(q);
                    }
                }
            }
            next += 1;
        }
        Ok(labels)
    }
}
