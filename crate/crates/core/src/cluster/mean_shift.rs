use super::{squared_distance, Clusterer};
use crate::error::Result;

const MAX_ITERS: usize = 300;

/// Flat-kernel mean shift. The bandwidth defaults to the median pairwise
/// distance; modes closer than half a bandwidth are merged.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanShift {
    pub bandwidth: Option<f64>,
}

pub(crate) fn median_pairwise_distance(rows: &[Vec<f64>]) -> f64 {
    let mut d: Vec<f64> = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            d.push(squared_distance(&rows[i], &rows[j]).sqrt());
        }
    }
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    }
}

impl Clusterer for MeanShift {
    fn fit_predict(&self, rows: &[Vec<f64>]) -> Result<Vec<i64>> {
        let n = rows.len();
        let bandwidth = self
            .bandwidth
            .unwrap_or_else(|| median_pairwise_distance(rows));
        if !(bandwidth > 0.0) {
            return Ok(vec![0; n]);
        }
        let bw2 = bandwidth * bandwidth;
        let tol = 1e-6 * bandwidth;
        let dim = rows[0].len();

        let modes: Vec<Vec<f64>> = rows
            .iter()
            .map(|seed| {
                let mut x = seed.clone();
                for _ in 0..MAX_ITERS {
                    let mut sum = vec![0.0; dim];
                    let mut count = 0usize;
                    for r in rows.iter().filter(|r| squared_distance(r, &x) <= bw2) {
                        count += 1;
                        for (s, v) in sum.iter_mut().zip(r) {
                            *s += v;
                        }
                    }
                    // x started on a data row and stays near one, so count ≥ 1
                    let next: Vec<f64> = sum.iter().map(|s| s / count.max(1) as f64).collect();
                    let shift = squared_distance(&next, &x).sqrt();
                    x = next;
                    if shift < tol {
                        break;
                    }
                }
                x
            })
            .collect();

        // modes within half a bandwidth of each other, transitively, form
        // one cluster; this does not depend on row order
        let merge2 = (bandwidth / 2.0).powi(2);
        let mut labels = vec![-1i64; n];
        let mut next = 0i64;
        for start in 0..n {
            if labels[start] >= 0 {
                continue;
            }
            labels[start] = next;
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    if labels[j] < 0 && squared_distance(&modes[i], &modes[j]) <= merge2 {
                        labels[j] = next;
                        stack.push(j);
                    }
                }
            }
            next += 1;
        }
        Ok(labels)
    }
}
