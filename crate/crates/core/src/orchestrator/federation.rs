use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::learner::{FitOutcome, LocalLearner};
use super::policy::{
    combine, combine_weighted, select_representative, server_test_model, train_start,
    update_member, MixWeights, PersonalizationPolicy, SelectionRule,
};
use crate::cluster::{cluster_devices, ClusterConfig};
use crate::comm::{CommModelParams, ModeledTime};
use crate::data::seeded_rng;
use crate::error::{Error, Result};
use crate::metrics::{DeviceTrace, RoundMetrics};
use crate::vqc::{LabeledDataset, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Every device trains every round; the server averages all models.
    Qfl,
    /// One representative per parameter-space cluster trains per round.
    #[default]
    Mdqfl,
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Qfl => "qfl",
            Protocol::Mdqfl => "mdqfl",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GlobalWeighting {
    /// Plain mean over devices.
    #[default]
    Uniform,
    /// Weight each device by its number of training samples.
    SampleSize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSettings {
    pub policy: PersonalizationPolicy,
    pub weights: MixWeights,
    pub selection: SelectionRule,
    pub clustering: ClusterConfig,
    pub comm: CommModelParams,
    pub global_weighting: GlobalWeighting,
    /// Every entry of the initial model.
    pub initial_param: f64,
    pub workers: usize,
}

impl Default for ProtocolSettings {
    fn default() -> Self {
        ProtocolSettings {
            policy: PersonalizationPolicy::default(),
            weights: MixWeights::default(),
            selection: SelectionRule::default(),
            clustering: ClusterConfig::default(),
            comm: CommModelParams::default(),
            global_weighting: GlobalWeighting::Uniform,
            initial_param: 0.5,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeviceState<D> {
    pub id: usize,
    pub train: D,
    pub test: D,
    pub n_train: usize,
    pub params: ModelParams,
    pub cluster_label: Option<usize>,
    pub latest_loss: Option<f64>,
    pub train_score: f64,
    pub test_score: f64,
    /// Seconds spent in the most recent local training.
    pub train_wall_time: f64,
    pub trainings: usize,
}

#[derive(Debug, Clone)]
pub struct ServerState<D> {
    /// Mean of all device models.
    pub global: Option<ModelParams>,
    /// Mean of this round's representative models.
    pub cluster_avg: Option<ModelParams>,
    pub cluster_models: Vec<ModelParams>,
    pub test_model: Option<ModelParams>,
    pub validation: D,
    pub test: D,
}

/// Input for one device: `(id, local train split, local test split)`.
pub type DeviceInput = (usize, LabeledDataset, LabeledDataset);

/// Simulated federation: devices, server and the round state machine.
pub struct Federation<L: LocalLearner> {
    learner: L,
    devices: Vec<DeviceState<L::Data>>,
    server: ServerState<L::Data>,
    settings: ProtocolSettings,
    selection_rng: ChaCha8Rng,
    rounds_done: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl<L: LocalLearner> Federation<L> {
    /// Devices must come in ascending id order and have non-empty splits.
    pub fn new(
        learner: L,
        devices: Vec<DeviceInput>,
        validation: &LabeledDataset,
        test: &LabeledDataset,
        settings: ProtocolSettings,
    ) -> Result<Self> {
        if devices.is_empty() {
            return Err(Error::contract(
                "a federation needs at least one device with data",
            ));
        }
        if devices.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::contract("devices must be sorted by ascending id"));
        }
        if validation.is_empty() || test.is_empty() {
            return Err(Error::contract(
                "server validation and test sets must be non-empty",
            ));
        }
        if settings.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        settings.clustering.validate()?;
        settings.weights.validate()?;
        settings.comm.validate()?;

        let p0 = ModelParams::filled(learner.parameter_count(), settings.initial_param);
        let devices = devices
            .into_iter()
            .map(|(id, train, test)| {
                if train.is_empty() || test.is_empty() {
                    return Err(Error::contract(format!("device {id} has an empty split")));
                }
                Ok(DeviceState {
                    id,
                    n_train: train.len(),
                    train: learner.prepare(&train)?,
                    test: learner.prepare(&test)?,
                    params: p0.clone(),
                    cluster_label: None,
                    latest_loss: None,
                    train_score: 0.0,
                    test_score: 0.0,
                    train_wall_time: 0.0,
                    trainings: 0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let server = ServerState {
            global: None,
            cluster_avg: None,
            cluster_models: Vec::new(),
            test_model: None,
            validation: learner.prepare(validation)?,
            test: learner.prepare(test)?,
        };

        #[cfg(feature = "parallel")]
        let pool = if settings.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(settings.workers)
                    .build()
                    .map_err(|e| Error::config("workers", e.to_string()))?,
            )
        } else {
            None
        };

        Ok(Federation {
            selection_rng: seeded_rng(settings.selection.seed),
            learner,
            devices,
            server,
            settings,
            rounds_done: 0,
            #[cfg(feature = "parallel")]
            pool,
        })
    }

    pub fn devices(&self) -> &[DeviceState<L::Data>] {
        &self.devices
    }

    pub fn server(&self) -> &ServerState<L::Data> {
        &self.server
    }

    pub fn settings(&self) -> &ProtocolSettings {
        &self.settings
    }

    pub fn rounds_done(&self) -> usize {
        self.rounds_done
    }

    pub fn total_trainings(&self) -> usize {
        self.devices.iter().map(|d| d.trainings).sum()
    }

    /// Runs `f` over `items` on the worker pool, preserving order.
    fn map_jobs<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| items.into_par_iter().map(&f).collect());
        }
        items.into_iter().map(f).collect()
    }

    /// Trains devices at `indices` from the paired starts and records results.
    fn train_devices(&mut self, jobs: Vec<(usize, ModelParams)>) -> Result<()> {
        let round = self.rounds_done + 1;
        let learner = &self.learner;
        let devices = &self.devices;
        let results: Vec<Result<(usize, FitOutcome, f64)>> = self.map_jobs(jobs, |(idx, start)| {
            let t0 = Instant::now();
            let d = &devices[idx];
            let out = learner
                .fit(&start, &d.train)
                .map_err(|e| e.context(format!("round {round}, device {}", d.id)))?;
            Ok((idx, out, t0.elapsed().as_secs_f64()))
        });
        for r in results {
            let (idx, out, secs) = r?;
            let d = &mut self.devices[idx];
            d.params = out.params;
            d.latest_loss = Some(out.loss);
            d.train_wall_time = secs;
            d.trainings += 1;
        }
        Ok(())
    }

    fn global_mean(&self) -> Result<ModelParams> {
        let models: Vec<&ModelParams> = self.devices.iter().map(|d| &d.params).collect();
        match self.settings.global_weighting {
            GlobalWeighting::Uniform => combine(&models),
            GlobalWeighting::SampleSize => {
                let w: Vec<f64> = self.devices.iter().map(|d| d.n_train as f64).collect();
                combine_weighted(&models, &w)
            }
        }
    }

    /// Scores every device's current model and the server's test model.
    fn finish_round(
        &mut self,
        started: Instant,
        trained: &[usize],
        clusters: usize,
        comm_events: usize,
        modeled: ModeledTime,
    ) -> Result<RoundMetrics> {
        self.rounds_done += 1;
        let round = self.rounds_done;
        let learner = &self.learner;
        let devices = &self.devices;
        let scores: Vec<Result<(f64, f64)>> = self.map_jobs((0..devices.len()).collect(), |i| {
            let d = &devices[i];
            let (_, tr) = learner.evaluate(&d.params, &d.train)?;
            let (_, te) = learner.evaluate(&d.params, &d.test)?;
            Ok((tr, te))
        });
        let mut traces = Vec::with_capacity(self.devices.len());
        for (i, s) in scores.into_iter().enumerate() {
            let (tr, te) = s.map_err(|e| e.context(format!("round {round}, scoring")))?;
            let d = &mut self.devices[i];
            d.train_score = tr;
            d.test_score = te;
            traces.push(DeviceTrace {
                round,
                device_id: d.id,
                cluster: d.cluster_label,
                trained: trained.contains(&i),
                latest_loss: d.latest_loss,
                train_acc: tr,
                test_acc: te,
            });
        }
        let n = self.devices.len() as f64;
        let avg_train = self.devices.iter().map(|d| d.train_score).sum::<f64>() / n;
        let avg_test = self.devices.iter().map(|d| d.test_score).sum::<f64>() / n;

        let test_model = self
            .server
            .test_model
            .as_ref()
            .expect("set before finishing");
        let (val_loss, val_acc) = self.learner.evaluate(test_model, &self.server.validation)?;
        let (test_loss, test_acc) = self.learner.evaluate(test_model, &self.server.test)?;

        Ok(RoundMetrics {
            round,
            trainings: trained.len(),
            comm_events,
            clusters,
            avg_device_train_acc: avg_train,
            avg_device_test_acc: avg_test,
            server_val_loss: val_loss,
            server_val_acc: val_acc,
            server_test_loss: test_loss,
            server_test_acc: test_acc,
            modeled_t_comm: modeled.t_comm,
            modeled_t_train: modeled.t_train,
            modeled_t_total: modeled.t_total,
            wall_clock: started.elapsed().as_secs_f64(),
            device_traces: traces,
        })
    }

    /// First round of the clustered protocol: every device trains from the
    /// initial model, then the server aggregates.
    pub fn initial_round(&mut self) -> Result<RoundMetrics> {
        if self.rounds_done != 0 {
            return Err(Error::contract("initial round already executed"));
        }
        let started = Instant::now();
        let p0 = ModelParams::filled(self.learner.parameter_count(), self.settings.initial_param);
        let jobs: Vec<(usize, ModelParams)> =
            (0..self.devices.len()).map(|i| (i, p0.clone())).collect();
        let trained: Vec<usize> = jobs.iter().map(|j| j.0).collect();
        self.train_devices(jobs)?;

        let global = self.global_mean()?;
        self.server.test_model = Some(server_test_model(
            self.settings.policy.test,
            &global,
            None,
            &self.settings.weights,
        )?);
        self.server.global = Some(global);
        let n = self.devices.len();
        self.finish_round(
            started,
            &trained,
            0,
            n + 1,
            ModeledTime::for_round(n, 1, &self.settings.comm),
        )
    }

    /// One clustered round: cluster, select one representative per group,
    /// train it, update the group, aggregate, evaluate.
    pub fn mdqfl_round(&mut self) -> Result<RoundMetrics> {
        if self.rounds_done == 0 {
            return self.initial_round();
        }
        let round = self.rounds_done + 1;
        let started = Instant::now();
        let global = self
            .server
            .global
            .clone()
            .expect("set by the initial round");
        let snapshot: Vec<ModelParams> = self.devices.iter().map(|d| d.params.clone()).collect();
        let rows: Vec<Vec<f64>> = snapshot.iter().map(|p| p.0.clone()).collect();
        let assignment = cluster_devices(&rows, &self.settings.clustering)
            .map_err(|e| e.context(format!("round {round}, clustering")))?;
        for (d, &l) in self.devices.iter_mut().zip(&assignment.labels) {
            d.cluster_label = Some(l);
        }

        let mut reps = Vec::with_capacity(assignment.n_clusters());
        for group in &assignment.groups {
            let candidates: Vec<(usize, Option<f64>)> = group
                .iter()
                .map(|&i| (self.devices[i].id, self.devices[i].latest_loss))
                .collect();
            let pos = select_representative(
                &candidates,
                self.settings.selection.kind,
                &mut self.selection_rng,
            )?;
            reps.push(group[pos]);
        }
        let jobs = reps
            .iter()
            .map(|&i| {
                Ok((
                    i,
                    train_start(
                        self.settings.policy.train,
                        &global,
                        self.server.cluster_avg.as_ref(),
                        &self.settings.weights,
                    )?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        self.train_devices(jobs)?;

        let cluster_models: Vec<ModelParams> = reps
            .iter()
            .map(|&i| self.devices[i].params.clone())
            .collect();
        for (group, rep_model) in assignment.groups.iter().zip(&cluster_models) {
            for &i in group {
                self.devices[i].params = update_member(
                    self.settings.policy.update,
                    rep_model,
                    &snapshot[i],
                    &global,
                    &self.settings.weights,
                )?;
            }
        }

        let new_global = self.global_mean()?;
        let cluster_avg = combine(&cluster_models.iter().collect::<Vec<_>>())?;
        self.server.test_model = Some(server_test_model(
            self.settings.policy.test,
            &new_global,
            Some(&cluster_avg),
            &self.settings.weights,
        )?);
        self.server.global = Some(new_global);
        self.server.cluster_avg = Some(cluster_avg);
        self.server.cluster_models = cluster_models;

        let k = reps.len();
        self.finish_round(
            started,
            &reps,
            k,
            k + 1,
            ModeledTime::for_round(k, 1, &self.settings.comm),
        )
    }

    /// One baseline round: all devices train (from the global model after
    /// the first round), the server averages and broadcasts.
    pub fn qfl_round(&mut self) -> Result<RoundMetrics> {
        let started = Instant::now();
        let start = match &self.server.global {
            Some(g) => g.clone(),
            None => {
                ModelParams::filled(self.learner.parameter_count(), self.settings.initial_param)
            }
        };
        let jobs: Vec<(usize, ModelParams)> = (0..self.devices.len())
            .map(|i| (i, start.clone()))
            .collect();
        let trained: Vec<usize> = jobs.iter().map(|j| j.0).collect();
        self.train_devices(jobs)?;
        let global = self.global_mean()?;
        for d in &mut self.devices {
            d.params = global.clone();
        }
        self.server.test_model = Some(global.clone());
        self.server.global = Some(global);
        let n = self.devices.len();
        self.finish_round(
            started,
            &trained,
            0,
            n,
            ModeledTime::for_round(n, 0, &self.settings.comm),
        )
    }

    pub fn run(&mut self, protocol: Protocol, rounds: usize) -> Result<Vec<RoundMetrics>> {
        (0..rounds)
            .map(|_| match protocol {
                Protocol::Qfl => self.qfl_round(),
                Protocol::Mdqfl => self.mdqfl_round(),
            })
            .collect()
    }
}
