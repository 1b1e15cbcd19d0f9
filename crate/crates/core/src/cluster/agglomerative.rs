use super::{squared_distance, Clusterer};
use crate::error::Result;

/// Ward-linkage agglomerative clustering cut at `k` clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ward {
    pub k: usize,
}

impl Clusterer for Ward {
    fn fit_predict(&self, rows: &[Vec<f64>]) -> Result<Vec<i64>> {
        let n = rows.len();
        let k = self.k.clamp(1, n);
        // (members, centroid)
        let mut clusters: Vec<(Vec<usize>, Vec<f64>)> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (vec![i], r.clone()))
            .collect();
        while clusters.len() > k {
            let mut best = (0, 1, f64::INFINITY);
            for a in 0..clusters.len() {
                for b in a + 1..clusters.len() {
                    let (na, nb) = (clusters[a].0.len() as f64, clusters[b].0.len() as f64);
                    let cost =
                        na * nb / (na + nb) * squared_distance(&clusters[a].1, &clusters[b].1);
                    if cost < best.2 {
                        best = (a, b, cost);
                    }
                }
            }
            let (a, b, _) = best;
            let (mb, cb) = clusters.remove(b);
            let (ma, ca) = &mut clusters[a];
            let (na, nb) = (ma.len() as f64, mb.len() as f64);
            for (x, y) in ca.iter_mut().zip(&cb) {
                *x = (*x * na + y * nb) / (na + nb);
            }
            ma.extend(mb);
        }
        let mut labels = vec![0i64; n];
        for (l, (members, _)) in clusters.iter().enumerate() {
            for &i in members {
                labels[i] = l as i64;
            }
        }
        Ok(labels)
    }
}
