//! End-to-end runs: data preparation, federation setup and protocol loop.

use crate::config::ExperimentConfig;
use crate::data::{
    device_local_prepare, lcycle_distribute, load_dataset, standardize, train_validation_split,
    MinMaxScaler, PcaModel,
};
use crate::error::{Error, Result};
use crate::metrics::RoundMetrics;
use crate::orchestrator::{
    DeviceInput, Federation, LocalLearner, Protocol, ProtocolSettings, SelectionRule, VqcLearner,
};
use crate::vqc::{LabeledDataset, Vqc};

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    /// Devices holding at least two rows, in id order.
    pub devices: Vec<DeviceInput>,
    /// Devices dropped because their shard had fewer than two rows.
    pub skipped: Vec<usize>,
    pub validation: LabeledDataset,
    pub test: LabeledDataset,
}

/// Load, standardize, project, split off the server validation set,
/// distribute over devices and prepare each device's local split.
///
/// Server-side sets are min-max scaled with the range of the device pool.
pub fn prepare_data(cfg: &ExperimentConfig) -> Result<PreparedData> {
    let ds = &cfg.dataset;
    let (train, test) = load_dataset(&ds.source, ds.n_train, ds.n_test, cfg.seeds.data)
        .map_err(|e| e.context("loading dataset"))?;
    let (train_std, test_std, _) = standardize(&train.features, &test.features)?;
    let pca = PcaModel::fit(&train_std, ds.pca_components)?;
    let train_pc = pca.transform(&train_std)?;
    let test_pc = pca.transform(&test_std)?;

    let ((pool_x, pool_y), (val_x, val_y)) = train_validation_split(
        &train_pc,
        &train.labels,
        ds.validation_split,
        cfg.seeds.split,
    )?;

    let shards = lcycle_distribute(&pool_x, &pool_y, cfg.n_devices, cfg.n_class)?;
    let mut devices = Vec::new();
    let mut skipped = Vec::new();
    for shard in &shards {
        let seed = cfg.seeds.device.wrapping_add(shard.device_id as u64);
        match device_local_prepare(shard, seed)? {
            Some(split) => devices.push((shard.device_id, split.train, split.test)),
            None => skipped.push(shard.device_id),
        }
    }
    if devices.is_empty() {
        return Err(Error::config(
            "n_class",
            "no device received enough rows; raise n_train or n_class",
        ));
    }

    let server_scaler = MinMaxScaler::fit(&pool_x)?;
    Ok(PreparedData {
        devices,
        skipped,
        validation: LabeledDataset::new(server_scaler.transform(&val_x), val_y)?,
        test: LabeledDataset::new(server_scaler.transform(&test_pc), test.labels)?,
    })
}

pub fn protocol_settings(cfg: &ExperimentConfig) -> ProtocolSettings {
    ProtocolSettings {
        policy: cfg.policy.modes,
        weights: cfg.policy.weights,
        selection: SelectionRule {
            kind: cfg.selection.kind,
            seed: cfg.selection.seed,
        },
        clustering: cfg.clustering.clone(),
        comm: cfg.comm,
        global_weighting: cfg.policy.global_weighting,
        initial_param: cfg.initial_param,
        workers: cfg.workers,
    }
}

pub fn build_learner(cfg: &ExperimentConfig) -> Result<VqcLearner> {
    Ok(VqcLearner {
        vqc: Vqc::new(
            cfg.dataset.pca_components,
            cfg.model.ansatz_reps,
            cfg.model_classes(),
        )?,
        optimizer: cfg.optimizer.clone(),
    })
}

/// Checks the per-round training and communication counts of a run.
pub fn check_round_counts(
    protocol: Protocol,
    n_devices: usize,
    metrics: &[RoundMetrics],
) -> Result<()> {
    for m in metrics {
        let (trainings, events) = match (protocol, m.round) {
            (Protocol::Qfl, _) => (n_devices, n_devices),
            (Protocol::Mdqfl, 1) => (n_devices, n_devices + 1),
            (Protocol::Mdqfl, _) => (m.clusters, m.clusters + 1),
        };
        if m.trainings != trainings || m.comm_events != events {
            return Err(Error::contract(format!(
                "round {}: {} trainings / {} events, expected {trainings} / {events}",
                m.round, m.trainings, m.comm_events
            )));
        }
    }
    Ok(())
}

/// Runs `protocol` for `rounds` rounds with any local learner.
pub fn run_federation<L: LocalLearner>(
    learner: L,
    data: &PreparedData,
    settings: ProtocolSettings,
    protocol: Protocol,
    rounds: usize,
) -> Result<Vec<RoundMetrics>> {
    let mut fed = Federation::new(
        learner,
        data.devices.clone(),
        &data.validation,
        &data.test,
        settings,
    )?;
    let metrics = fed.run(protocol, rounds)?;
    check_round_counts(protocol, data.devices.len(), &metrics)?;
    Ok(metrics)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub metrics: Vec<RoundMetrics>,
    pub active_devices: usize,
    pub skipped_devices: Vec<usize>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let data = prepare_data(cfg)?;
    let learner = build_learner(cfg)?;
    log::info!(
        "{}: {} active devices, {} skipped, {} rounds",
        cfg.protocol.name(),
        data.devices.len(),
        data.skipped.len(),
        cfg.rounds
    );
    let metrics = run_federation(
        learner,
        &data,
        protocol_settings(cfg),
        cfg.protocol,
        cfg.rounds,
    )?;
    Ok(ExperimentRun {
        metrics,
        active_devices: data.devices.len(),
        skipped_devices: data.skipped,
    })
}
