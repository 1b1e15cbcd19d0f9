//! Personalization and generalization choices, and the model arithmetic
//! they rely on.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vqc::ModelParams;

/// Model a representative starts training from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainStart {
    /// The global mean model.
    Global,
    /// Mix of the cluster-average and global models.
    ClusterGlobal,
}

/// How cluster members absorb their representative's new model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemberUpdate {
    /// Replace with the representative's model.
    Representative,
    /// Mix of the representative's model and the member's own.
    RepresentativeOwn,
    /// Mix of representative, own and global models.
    RepresentativeOwnGlobal,
}

/// Model the server evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestModel {
    Global,
    GlobalCluster,
    Cluster,
}

/// `[train, update, test]` mode triple; index `i` of each slot selects the
/// `i`-th variant above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[u8; 3]", into = "[u8; 3]")]
pub struct PersonalizationPolicy {
    pub train: TrainStart,
    pub update: MemberUpdate,
    pub test: TestModel,
}

impl PersonalizationPolicy {
    /// The five combinations evaluated in the reference experiments.
    pub const REFERENCE_SET: [[u8; 3]; 5] = [[0, 2, 0], [1, 0, 2], [1, 1, 1], [1, 2, 1], [1, 1, 2]];

    pub fn modes(&self) -> [u8; 3] {
        (*self).into()
    }
}

impl Default for PersonalizationPolicy {
    fn default() -> Self {
        PersonalizationPolicy::try_from([1, 1, 1]).expect("valid triple")
    }
}

impl TryFrom<[u8; 3]> for PersonalizationPolicy {
    type Error = Error;

    fn try_from([t, u, s]: [u8; 3]) -> Result<Self> {
        let train = match t {
            0 => TrainStart::Global,
            1 => TrainStart::ClusterGlobal,
            _ => {
                return Err(Error::config(
                    "policy.modes[0]",
                    format!("train mode {t} not in 0..=1"),
                ))
            }
        };
        let update = match u {
            0 => MemberUpdate::Representative,
            1 => MemberUpdate::RepresentativeOwn,
            2 => MemberUpdate::RepresentativeOwnGlobal,
            _ => {
                return Err(Error::config(
                    "policy.modes[1]",
                    format!("update mode {u} not in 0..=2"),
                ))
            }
        };
        let test = match s {
            0 => TestModel::Global,
            1 => TestModel::GlobalCluster,
            2 => TestModel::Cluster,
            _ => {
                return Err(Error::config(
                    "policy.modes[2]",
                    format!("test mode {s} not in 0..=2"),
                ))
            }
        };
        Ok(PersonalizationPolicy {
            train,
            update,
            test,
        })
    }
}

impl From<PersonalizationPolicy> for [u8; 3] {
    fn from(p: PersonalizationPolicy) -> Self {
        [
            match p.train {
                TrainStart::Global => 0,
                TrainStart::ClusterGlobal => 1,
            },
            match p.update {
                MemberUpdate::Representative => 0,
                MemberUpdate::RepresentativeOwn => 1,
                MemberUpdate::RepresentativeOwnGlobal => 2,
            },
            match p.test {
                TestModel::Global => 0,
                TestModel::GlobalCluster => 1,
                TestModel::Cluster => 2,
            },
        ]
    }
}

/// Relative weights of a device's own, cluster and global models whenever
/// several are mixed. Equal weights give the plain mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixWeights {
    pub own: f64,
    pub cluster: f64,
    pub global: f64,
}

impl Default for MixWeights {
    fn default() -> Self {
        MixWeights {
            own: 1.0,
            cluster: 1.0,
            global: 1.0,
        }
    }
}

impl MixWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("policy.weights.own", self.own),
            ("policy.weights.cluster", self.cluster),
            ("policy.weights.global", self.global),
        ] {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::config(name, "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelectionKind {
    /// Lowest most-recent training loss; ties go to the lower device id.
    #[default]
    LossArgmin,
    UniformRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionRule {
    pub kind: SelectionKind,
    pub seed: u64,
}

fn check_lengths(models: &[&ModelParams]) -> Result<usize> {
    let Some(first) = models.first() else {
        return Err(Error::contract("cannot combine an empty list of models"));
    };
    let d = first.len();
    if models.iter().any(|m| m.len() != d) {
        return Err(Error::contract("models differ in length"));
    }
    Ok(d)
}

/// Elementwise mean, summed in the given order.
pub fn combine(models: &[&ModelParams]) -> Result<ModelParams> {
    let weights = vec![1.0; models.len()];
    combine_weighted(models, &weights)
}

/// `Σ w_i θ_i / Σ w_i`, summed in the given order.
pub fn combine_weighted(models: &[&ModelParams], weights: &[f64]) -> Result<ModelParams> {
    let d = check_lengths(models)?;
    if weights.len() != models.len() {
        return Err(Error::contract("one weight per model required"));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::contract("weights must sum to a positive value"));
    }
    let mut out = vec![0.0; d];
    for (m, w) in models.iter().zip(weights) {
        for (o, v) in out.iter_mut().zip(m.as_slice()) {
            *o += w * v;
        }
    }
    out.iter_mut().for_each(|v| *v /= total);
    Ok(ModelParams(out))
}

/// Picks a representative among `(device_id, latest_loss)` pairs and returns
/// its position in `group`.
pub fn select_representative<R: Rng>(
    group: &[(usize, Option<f64>)],
    rule: SelectionKind,
    rng: &mut R,
) -> Result<usize> {
    if group.is_empty() {
        return Err(Error::contract("cannot select from an empty group"));
    }
    match rule {
        SelectionKind::UniformRandom => Ok(rng.random_range(0..group.len())),
        SelectionKind::LossArgmin => {
            let mut best: Option<(usize, usize, f64)> = None;
            for (pos, &(id, loss)) in group.iter().enumerate() {
                let loss = loss
                    .ok_or_else(|| Error::contract(format!("device {id} has no recorded loss")))?;
                let better = match best {
                    None => true,
                    Some((_, bid, bl)) => loss < bl || (loss == bl && id < bid),
                };
                if better {
                    best = Some((pos, id, loss));
                }
            }
            Ok(best.expect("non-empty group").0)
        }
    }
}

/// Training start for a representative. Without a cluster average yet, the
/// mixed mode falls back to the global model.
pub fn train_start(
    mode: TrainStart,
    global: &ModelParams,
    cluster_avg: Option<&ModelParams>,
    w: &MixWeights,
) -> Result<ModelParams> {
    match (mode, cluster_avg) {
        (TrainStart::Global, _) => Ok(global.clone()),
        (TrainStart::ClusterGlobal, Some(c)) => {
            combine_weighted(&[c, global], &[w.cluster, w.global])
        }
        (TrainStart::ClusterGlobal, None) => {
            log::debug!("no cluster-average model yet, training from the global model");
            Ok(global.clone())
        }
    }
}

/// New parameters of one cluster member after its representative trained.
pub fn update_member(
    mode: MemberUpdate,
    representative: &ModelParams,
    own_old: &ModelParams,
    global: &ModelParams,
    w: &MixWeights,
) -> Result<ModelParams> {
    match mode {
        MemberUpdate::Representative => Ok(representative.clone()),
        MemberUpdate::RepresentativeOwn => {
            combine_weighted(&[representative, own_old], &[w.cluster, w.own])
        }
        MemberUpdate::RepresentativeOwnGlobal => combine_weighted(
            &[representative, own_old, global],
            &[w.cluster, w.own, w.global],
        ),
    }
}

/// Server evaluation model. Without a cluster average it falls back to the global model.
pub fn server_test_model(
    mode: TestModel,
    global: &ModelParams,
    cluster_avg: Option<&ModelParams>,
    w: &MixWeights,
) -> Result<ModelParams> {
    match (mode, cluster_avg) {
        (TestModel::Global, _) | (_, None) => Ok(global.clone()),
        (TestModel::GlobalCluster, Some(c)) => {
            combine_weighted(&[global, c], &[w.global, w.cluster])
        }
        (TestModel::Cluster, Some(c)) => Ok(c.clone()),
    }
}

/// `(θ_g, θ_c)`: means over device models (ascending device id) and over the
/// round's representative models (ascending cluster label).
pub fn aggregate(
    device_models: &[&ModelParams],
    cluster_models: &[&ModelParams],
) -> Result<(ModelParams, ModelParams)> {
    Ok((combine(device_models)?, combine(cluster_models)?))
}
