//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each export has a plain Rust counterpart that returns `Result<_, String>`
//! so it can be tested natively.

use mdqfl_core::cluster::{
    cluster_count, cluster_devices, ClusterConfig, ClusterMethod, KMeansInit,
};
use mdqfl_core::comm::{modeled_time_mdqfl, modeled_time_qfl, CommModelParams};
use mdqfl_core::data::{lcycle_distribute, LABEL_MODULUS};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostPoint {
    pub n_devices: usize,
    pub n_clusters: usize,
    pub qfl: f64,
    pub mdqfl: f64,
    pub ratio: f64,
}

/// Modeled per-round time of both protocols for `1..=max_devices`.
pub fn cost_curve(
    max_devices: usize,
    c_d: f64,
    c_agg: f64,
    alpha: f64,
) -> Result<Vec<CostPoint>, String> {
    if max_devices == 0 || max_devices > 10_000 {
        return Err("max_devices must be in 1..=10000".into());
    }
    let comm = CommModelParams { c_d, c_agg, alpha };
    comm.validate().map_err(|e| e.to_string())?;
    (1..=max_devices)
        .map(|n| {
            let q = modeled_time_qfl(n, &comm)
                .map_err(|e| e.to_string())?
                .t_total;
            let m = modeled_time_mdqfl(n, &comm)
                .map_err(|e| e.to_string())?
                .t_total;
            Ok(CostPoint {
                n_devices: n,
                n_clusters: cluster_count(n),
                qfl: q,
                mdqfl: m,
                ratio: if m > 0.0 { q / m } else { f64::NAN },
            })
        })
        .collect()
}

/// `grid[device][label]` is true when the device holds that label.
pub fn label_grid(n_devices: usize, n_class: usize) -> Result<Vec<Vec<bool>>, String> {
    if n_devices == 0 || n_devices > 200 {
        return Err("n_devices must be in 1..=200".into());
    }
    let x: Vec<Vec<f64>> = (0..LABEL_MODULUS).map(|l| vec![l as f64]).collect();
    let y: Vec<usize> = (0..LABEL_MODULUS).collect();
    let shards = lcycle_distribute(&x, &y, n_devices, n_class).map_err(|e| e.to_string())?;
    Ok(shards
        .iter()
        .map(|s| (0..LABEL_MODULUS).map(|l| s.labels.contains(&l)).collect())
        .collect())
}

fn parse_method(name: &str) -> Result<ClusterMethod, String> {
    match name {
        "kmeans" => Ok(ClusterMethod::Kmeans),
        "agglomerative" => Ok(ClusterMethod::Agglomerative),
        "dbscan" => Ok(ClusterMethod::Dbscan),
        "mean_shift" => Ok(ClusterMethod::MeanShift),
        other => Err(format!("unknown method `{other}`")),
    }
}

/// Clusters 2-D points given as `[x0, y0, x1, y1, …]`. `k = 0` uses the
/// device-count rule.
pub fn cluster_xy(
    flat: &[f64],
    method: &str,
    k: usize,
    eps: f64,
    seed: u64,
) -> Result<Vec<usize>, String> {
    if !flat.len().is_multiple_of(2) || flat.is_empty() {
        return Err("expected a non-empty list of x, y pairs".into());
    }
    let rows: Vec<Vec<f64>> = flat.chunks(2).map(<[f64]>::to_vec).collect();
    let cfg = ClusterConfig {
        method: parse_method(method)?,
        k: (k > 0).then_some(k),
        dbscan_eps: eps,
        dbscan_min_samples: 2,
        kmeans_init: KMeansInit::PlusPlus,
        seed,
        ..ClusterConfig::default()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cluster_devices(&rows, &cfg)
        .map_err(|e| e.to_string())?
        .labels)
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    let v = r.map_err(|e| JsValue::from_str(&e))?;
    serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string()))
}

/// JSON array of cost points.
#[wasm_bindgen(js_name = costCurve)]
pub fn cost_curve_js(
    max_devices: usize,
    c_d: f64,
    c_agg: f64,
    alpha: f64,
) -> Result<String, JsValue> {
    to_js(cost_curve(max_devices, c_d, c_agg, alpha))
}

/// JSON matrix of booleans, devices by labels.
#[wasm_bindgen(js_name = labelGrid)]
pub fn label_grid_js(n_devices: usize, n_class: usize) -> Result<String, JsValue> {
    to_js(label_grid(n_devices, n_class))
}

#[wasm_bindgen(js_name = clusterPoints)]
pub fn cluster_points_js(
    flat: Vec<f64>,
    method: &str,
    k: usize,
    eps: f64,
    seed: u32,
) -> Result<Vec<u32>, JsValue> {
    cluster_xy(&flat, method, k, eps, seed as u64)
        .map(|l| l.into_iter().map(|v| v as u32).collect())
        .map_err(|e| JsValue::from_str(&e))
}
