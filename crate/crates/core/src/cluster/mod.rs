//! Grouping of devices by model-parameter similarity.
//!
//! Four methods are built in. Other methods (Gaussian mixtures, spectral
//! clustering) can be plugged into the orchestrator by implementing
//! [`Clusterer`].

mod agglomerative;
mod dbscan;
mod kmeans;
mod mean_shift;

pub use agglomerative::Ward;
pub use dbscan::Dbscan;
pub use kmeans::{KMeans, KMeansFit, KMeansInit};
pub use mean_shift::MeanShift;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterMethod {
    Kmeans,
    Agglomerative,
    Dbscan,
    MeanShift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    pub method: ClusterMethod,
    /// Fixed cluster count. `None` derives it from the device count every round.
    pub k: Option<usize>,
    pub dbscan_eps: f64,
    pub dbscan_min_samples: usize,
    pub kmeans_init: KMeansInit,
    pub kmeans_n_init: usize,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            method: ClusterMethod::Kmeans,
            k: None,
            dbscan_eps: 0.5,
            dbscan_min_samples: 5,
            kmeans_init: KMeansInit::PlusPlus,
            kmeans_n_init: 10,
            seed: 0,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == Some(0) {
            return Err(Error::config("clustering.k", "must be at least 1"));
        }
        if !(self.dbscan_eps > 0.0) {
            return Err(Error::config("clustering.dbscan_eps", "must be positive"));
        }
        if self.dbscan_min_samples == 0 {
            return Err(Error::config(
                "clustering.dbscan_min_samples",
                "must be at least 1",
            ));
        }
        if self.kmeans_n_init == 0 {
            return Err(Error::config(
                "clustering.kmeans_n_init",
                "must be at least 1",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Compacted label per row, `0..groups.len()`.
    pub labels: Vec<usize>,
    /// Row indices per label, ascending.
    pub groups: Vec<Vec<usize>>,
}

impl ClusterAssignment {
    /// Builds an assignment from raw labels. Negative labels (noise) become
    /// singleton clusters; labels are renumbered in order of first appearance.
    pub fn from_raw(raw: &[i64]) -> Self {
        let mut map: Vec<(i64, usize)> = Vec::new();
        let mut labels = Vec::with_capacity(raw.len());
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, &r) in raw.iter().enumerate() {
            let label = if r < 0 {
                groups.push(Vec::new());
                groups.len() - 1
            } else if let Some(&(_, l)) = map.iter().find(|(k, _)| *k == r) {
                l
            } else {
                groups.push(Vec::new());
                map.push((r, groups.len() - 1));
                groups.len() - 1
            };
            groups[label].push(i);
            labels.push(label);
        }
        ClusterAssignment { labels, groups }
    }

    pub fn n_clusters(&self) -> usize {
        self.groups.len()
    }
}

/// A clustering method over parameter rows. Returned labels may be
/// arbitrary integers; negative values mark noise.
pub trait Clusterer {
    fn fit_predict(&self, rows: &[Vec<f64>]) -> Result<Vec<i64>>;
}

/// `max(1, ⌈√(n/2)⌉)`.
pub fn cluster_count(n_devices: usize) -> usize {
    let k = (n_devices as f64 / 2.0).sqrt().ceil() as usize;
    k.max(1)
}

/// `‖a − b‖²`.
pub fn pairwise_dissimilarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "parameter vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(squared_distance(a, b))
}

/// `‖a − b‖ ≤ ε`, boundary inclusive.
pub fn redundancy_test(a: &[f64], b: &[f64], epsilon: f64) -> Result<bool> {
    Ok(pairwise_dissimilarity(a, b)?.sqrt() <= epsilon)
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_rows(rows: &[Vec<f64>]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::contract("cannot cluster zero devices"));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::contract("parameter rows differ in length"));
    }
    Ok(())
}

/// Builds the configured method with `k` already resolved for `n` rows.
pub fn build_clusterer(cfg: &ClusterConfig, n: usize) -> Box<dyn Clusterer + Send + Sync> {
    let mut k = cfg.k.unwrap_or_else(|| cluster_count(n));
    if matches!(
        cfg.method,
        ClusterMethod::Kmeans | ClusterMethod::Agglomerative
    ) && k > n
    {
        log::warn!("cluster count {k} exceeds {n} devices, clamping");
        k = n;
    }
    match cfg.method {
        ClusterMethod::Kmeans => Box::new(KMeans {
            k,
            init: cfg.kmeans_init,
            n_init: cfg.kmeans_n_init,
            seed: cfg.seed,
        }),
        ClusterMethod::Agglomerative => Box::new(Ward { k }),
        ClusterMethod::Dbscan => Box::new(Dbscan {
            eps: cfg.dbscan_eps,
            min_samples: cfg.dbscan_min_samples,
        }),
        ClusterMethod::MeanShift => Box::new(MeanShift::default()),
    }
}

/// Clusters parameter rows (one per device) into a partition.
pub fn cluster_devices(rows: &[Vec<f64>], cfg: &ClusterConfig) -> Result<ClusterAssignment> {
    cfg.validate()?;
    check_rows(rows)?;
    let raw = build_clusterer(cfg, rows.len()).fit_predict(rows)?;
    Ok(ClusterAssignment::from_raw(&raw))
}
