use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{squared_distance, Clusterer};
use crate::data::seeded_rng;
use crate::error::Result;
use crate::tolerance;

const MAX_LLOYD_ITERS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KMeansInit {
    /// Seeded k-means++ sampling.
    #[default]
    PlusPlus,
    /// Deterministic: start at the row farthest from the centroid, then keep
    /// adding the row farthest from the chosen set. Independent of row order.
    FarthestPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub k: usize,
    pub init: KMeansInit,
    /// Restarts for k-means++; the lowest-inertia run wins.
    pub n_init: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    /// Within-cluster sum of squares after each assignment step.
    pub inertia_history: Vec<f64>,
}

impl KMeansFit {
    pub fn inertia(&self) -> f64 {
        *self.inertia_history.last().unwrap_or(&0.0)
    }
}

impl KMeans {
    pub fn fit(&self, rows: &[Vec<f64>]) -> KMeansFit {
        let k = self.k.clamp(1, rows.len().max(1));
        match self.init {
            KMeansInit::FarthestPoint => lloyd(rows, farthest_point_init(rows, k)),
            KMeansInit::PlusPlus => {
                let mut rng = seeded_rng(self.seed);
                let mut best: Option<KMeansFit> = None;
                for _ in 0..self.n_init.max(1) {
                    let fit = lloyd(rows, plus_plus_init(rows, k, &mut rng));
                    if best.as_ref().is_none_or(|b| fit.inertia() < b.inertia()) {
                        best = Some(fit);
                    }
                }
                best.expect("at least one init")
            }
        }
    }
}

impl Clusterer for KMeans {
    fn fit_predict(&self, rows: &[Vec<f64>]) -> Result<Vec<i64>> {
        Ok(self
            .fit(rows)
            .labels
            .into_iter()
            .map(|l| l as i64)
            .collect())
    }
}

fn nearest(row: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = squared_distance(row, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn lloyd(rows: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> KMeansFit {
    let dim = rows[0].len();
    let mut labels = vec![0; rows.len()];
    let mut inertia_history = Vec::new();
    for _ in 0..MAX_LLOYD_ITERS {
        let mut inertia = 0.0;
        for (row, label) in rows.iter().zip(labels.iter_mut()) {
            let (c, d) = nearest(row, &centers);
            *label = c;
            inertia += d;
        }
        inertia_history.push(inertia);

        let mut sums = vec![vec![0.0; dim]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (row, &l) in rows.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(row) {
                *s += v;
            }
        }
        let mut max_shift: f64 = 0.0;
        for (c, center) in centers.iter_mut().enumerate() {
            // an empty cluster keeps its previous center
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            max_shift = max_shift.max(squared_distance(&new, center).sqrt());
            *center = new;
        }
        if max_shift < tolerance::KMEANS_SHIFT {
            break;
        }
    }
    // final assignment against the settled centers
    let mut inertia = 0.0;
    for (row, label) in rows.iter().zip(labels.iter_mut()) {
        let (c, d) = nearest(row, &centers);
        *label = c;
        inertia += d;
    }
    inertia_history.push(inertia);
    KMeansFit {
        labels,
        centers,
        inertia_history,
    }
}

fn plus_plus_init(rows: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centers = vec![rows[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = rows
        .iter()
        .map(|r| squared_distance(r, &centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.push(rows[pick].clone());
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(squared_distance(r, &centers[centers.len() - 1]));
        }
    }
    centers
}

/// Farther wins; on exact ties the lexicographically smaller row wins, so
/// the choice does not depend on row order.
fn better(candidate: (&[f64], f64), incumbent: (&[f64], f64)) -> bool {
    match candidate.1.total_cmp(&incumbent.1) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            for (a, b) in candidate.0.iter().zip(incumbent.0) {
                match a.total_cmp(b) {
                    std::cmp::Ordering::Less => return true,
                    std::cmp::Ordering::Greater => return false,
                    std::cmp::Ordering::Equal => {}
                }
            }
            false
        }
    }
}

fn farthest_point_init(rows: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let dim = rows[0].len();
    let mut centroid = vec![0.0; dim];
    for r in rows {
        for (c, v) in centroid.iter_mut().zip(r) {
            *c += v;
        }
    }
    centroid.iter_mut().for_each(|c| *c /= rows.len() as f64);

    let argfarthest = |dist: &dyn Fn(&[f64]) -> f64| {
        let mut best = 0;
        for i in 1..rows.len() {
            if better((&rows[i], dist(&rows[i])), (&rows[best], dist(&rows[best]))) {
                best = i;
            }
        }
        best
    };
    let mut centers = vec![rows[argfarthest(&|r| squared_distance(r, &centroid))].clone()];
    while centers.len() < k {
        let chosen = centers.clone();
        let min_d = move |r: &[f64]| {
            chosen
                .iter()
                .map(|c| squared_distance(r, c))
                .fold(f64::INFINITY, f64::min)
        };
        centers.push(rows[argfarthest(&min_d)].clone());
    }
    centers
}
