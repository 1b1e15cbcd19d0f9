//! Analytical communication and training-time model.
//!
//! Baseline: every device trains and uploads, `T = α·n_d + n_d·C_d`.
//! Clustered: one device per cluster plus one aggregation,
//! `T = α·n_c + n_c·C_d + C_agg` with `n_c = max(1, ⌈√(n_d/2)⌉)`.

use serde::{Deserialize, Serialize};

use crate::cluster::cluster_count;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommModelParams {
    /// Per-device communication cost.
    pub c_d: f64,
    /// Server aggregation cost.
    pub c_agg: f64,
    /// Training time per participating device.
    pub alpha: f64,
}

impl Default for CommModelParams {
    fn default() -> Self {
        CommModelParams {
            c_d: 1.0,
            c_agg: 1.0,
            alpha: 1.0,
        }
    }
}

impl CommModelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("comm.c_d", self.c_d),
            ("comm.c_agg", self.c_agg),
            ("comm.alpha", self.alpha),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, "must be a finite non-negative number"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ModeledTime {
    pub t_comm: f64,
    pub t_train: f64,
    pub t_total: f64,
}

impl ModeledTime {
    /// `participants` devices train and communicate; `aggregations` server
    /// aggregation steps are charged on top.
    pub fn for_round(participants: usize, aggregations: usize, comm: &CommModelParams) -> Self {
        let p = participants as f64;
        let t_comm = p * comm.c_d + aggregations as f64 * comm.c_agg;
        let t_train = comm.alpha * p;
        ModeledTime {
            t_comm,
            t_train,
            t_total: t_train + t_comm,
        }
    }
}

fn check_devices(n_d: usize) -> Result<()> {
    if n_d == 0 {
        return Err(Error::contract("device count must be at least 1"));
    }
    Ok(())
}

pub fn modeled_time_qfl(n_d: usize, comm: &CommModelParams) -> Result<ModeledTime> {
    check_devices(n_d)?;
    Ok(ModeledTime::for_round(n_d, 0, comm))
}

pub fn modeled_time_mdqfl(n_d: usize, comm: &CommModelParams) -> Result<ModeledTime> {
    check_devices(n_d)?;
    Ok(ModeledTime::for_round(cluster_count(n_d), 1, comm))
}

/// `T_total(baseline) / T_total(clustered)`.
pub fn performance_improvement(n_d: usize, comm: &CommModelParams) -> Result<f64> {
    let denom = modeled_time_mdqfl(n_d, comm)?.t_total;
    if denom == 0.0 {
        return Err(Error::contract("clustered total time is zero"));
    }
    Ok(modeled_time_qfl(n_d, comm)?.t_total / denom)
}
