//! Per-round records and their on-disk formats.
//!
//! `metrics.csv` columns, in order:
//! `round, trainings, comm_events, clusters, avg_device_train_acc,
//! avg_device_test_acc, server_val_loss, server_val_acc, server_test_loss,
//! server_test_acc, modeled_t_comm, modeled_t_train, modeled_t_total`.
//! Rounds are numbered from 1; round 1 is the initial all-device training.
//! Wall-clock times go to `timings.csv` so that `metrics.csv` is a pure
//! function of the configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const METRICS_COLUMNS: [&str; 13] = [
    "round",
    "trainings",
    "comm_events",
    "clusters",
    "avg_device_train_acc",
    "avg_device_test_acc",
    "server_val_loss",
    "server_val_acc",
    "server_test_loss",
    "server_test_acc",
    "modeled_t_comm",
    "modeled_t_train",
    "modeled_t_total",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceTrace {
    pub round: usize,
    pub device_id: usize,
    pub cluster: Option<usize>,
    pub trained: bool,
    pub latest_loss: Option<f64>,
    pub train_acc: f64,
    pub test_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: usize,
    pub trainings: usize,
    pub comm_events: usize,
    pub clusters: usize,
    pub avg_device_train_acc: f64,
    pub avg_device_test_acc: f64,
    pub server_val_loss: f64,
    pub server_val_acc: f64,
    pub server_test_loss: f64,
    pub server_test_acc: f64,
    pub modeled_t_comm: f64,
    pub modeled_t_train: f64,
    pub modeled_t_total: f64,
    #[serde(skip)]
    pub wall_clock: f64,
    #[serde(skip)]
    pub device_traces: Vec<DeviceTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TimingRow {
    round: usize,
    wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub data: u64,
    pub split: u64,
    pub device: u64,
    pub clustering: u64,
    pub selection: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub trainings: usize,
    pub comm_events: usize,
    pub modeled_t_total: f64,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub code_version: String,
    pub protocol: String,
    pub rounds: usize,
    pub final_round: Option<RoundMetrics>,
    pub totals: Totals,
    pub seeds: Seeds,
    pub config: ExperimentConfig,
}

impl Summary {
    pub fn new(metrics: &[RoundMetrics], config: &ExperimentConfig) -> Self {
        Summary {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            protocol: config.protocol.name().to_string(),
            rounds: metrics.len(),
            final_round: metrics.last().cloned(),
            totals: Totals {
                trainings: metrics.iter().map(|m| m.trainings).sum(),
                comm_events: metrics.iter().map(|m| m.comm_events).sum(),
                modeled_t_total: metrics.iter().map(|m| m.modeled_t_total).sum(),
                wall_clock_s: metrics.iter().map(|m| m.wall_clock).sum(),
            },
            seeds: config.seeds(),
            config: config.clone(),
        }
    }
}

pub fn write_metrics_csv(path: &Path, metrics: &[RoundMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if metrics.is_empty() {
        w.write_record(METRICS_COLUMNS)?;
    }
    for m in metrics {
        w.serialize(m)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<RoundMetrics>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if headers != METRICS_COLUMNS {
        return Err(Error::Load {
            path: path.display().to_string(),
            reason: format!("unexpected columns {headers:?}"),
        });
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Paths written by [`persist_metrics`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub metrics_csv: PathBuf,
    pub timings_csv: PathBuf,
    pub summary_json: PathBuf,
    pub device_traces_csv: Option<PathBuf>,
}

pub fn persist_metrics(
    metrics: &[RoundMetrics],
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<OutputFiles> {
    fs::create_dir_all(out_dir)?;
    let files = OutputFiles {
        metrics_csv: out_dir.join("metrics.csv"),
        timings_csv: out_dir.join("timings.csv"),
        summary_json: out_dir.join("summary.json"),
        device_traces_csv: config
            .write_device_traces
            .then(|| out_dir.join("device_traces.csv")),
    };
    write_metrics_csv(&files.metrics_csv, metrics)?;

    let mut w = csv::Writer::from_path(&files.timings_csv)?;
    for m in metrics {
        w.serialize(TimingRow {
            round: m.round,
            wall_clock_s: m.wall_clock,
        })?;
    }
    w.flush()?;

    if let Some(path) = &files.device_traces_csv {
        let mut w = csv::Writer::from_path(path)?;
        for t in metrics.iter().flat_map(|m| &m.device_traces) {
            w.serialize(t)?;
        }
        w.flush()?;
    }

    let summary = Summary::new(metrics, config);
    fs::write(
        &files.summary_json,
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(files)
}
