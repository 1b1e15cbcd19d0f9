use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::optim::{minimize, Objective, OptimizerConfig};
use crate::vqc::{EncodedDataset, LabeledDataset, ModelParams, Vqc};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub params: ModelParams,
    /// Final training objective.
    pub loss: f64,
    pub evaluations: usize,
}

/// The local model a device trains. `Data` is whatever per-dataset
/// precomputation the learner wants to keep between calls.
pub trait LocalLearner: Sync {
    type Data: Send + Sync;

    fn parameter_count(&self) -> usize;
    fn prepare(&self, data: &LabeledDataset) -> Result<Self::Data>;
    fn fit(&self, start: &ModelParams, data: &Self::Data) -> Result<FitOutcome>;
    /// `(loss, accuracy)`.
    fn evaluate(&self, params: &ModelParams, data: &Self::Data) -> Result<(f64, f64)>;
}

/// A variational classifier trained with one of the crate's optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct VqcLearner {
    pub vqc: Vqc,
    pub optimizer: OptimizerConfig,
}

struct VqcObjective<'a> {
    vqc: &'a Vqc,
    data: &'a EncodedDataset,
}

impl Objective for VqcObjective<'_> {
    fn value(&mut self, x: &[f64]) -> f64 {
        self.vqc
            .loss_encoded(&ModelParams(x.to_vec()), self.data)
            .unwrap_or(f64::NAN)
    }

    fn parameter_shift_gradient(&mut self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(
            self.vqc
                .loss_gradient_parameter_shift(&ModelParams(x.to_vec()), self.data),
        )
    }
}

impl LocalLearner for VqcLearner {
    type Data = EncodedDataset;

    fn parameter_count(&self) -> usize {
        self.vqc.parameter_count()
    }

    fn prepare(&self, data: &LabeledDataset) -> Result<EncodedDataset> {
        self.vqc.encode_dataset(data)
    }

    fn fit(&self, start: &ModelParams, data: &EncodedDataset) -> Result<FitOutcome> {
        let mut objective = VqcObjective {
            vqc: &self.vqc,
            data,
        };
        let r = minimize(&mut objective, start.as_slice(), &self.optimizer)?;
        Ok(FitOutcome {
            params: ModelParams(r.best_params),
            loss: r.best_value,
            evaluations: r.evaluations,
        })
    }

    fn evaluate(&self, params: &ModelParams, data: &EncodedDataset) -> Result<(f64, f64)> {
        self.vqc.evaluate_encoded(params, data)
    }
}
