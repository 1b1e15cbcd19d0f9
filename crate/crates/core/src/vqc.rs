//! Variational quantum classifier: ZZ-style feature map, real-amplitudes
//! ansatz, modulo class folding, cross-entropy loss and accuracy.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::{Gate, StateVector};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMapConfig {
    pub n_qubits: usize,
    pub reps: usize,
}

impl Default for FeatureMapConfig {
    fn default() -> Self {
        FeatureMapConfig {
            n_qubits: 4,
            reps: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub n_qubits: usize,
    pub reps: usize,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        AnsatzConfig {
            n_qubits: 4,
            reps: 3,
        }
    }
}

impl AnsatzConfig {
    pub fn parameter_count(&self) -> usize {
        self.n_qubits * (self.reps + 1)
    }
}

/// Flat vector of ansatz rotation angles (radians).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelParams(pub Vec<f64>);

impl ModelParams {
    pub fn filled(len: usize, value: f64) -> Self {
        ModelParams(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ModelParams {
    fn from(v: Vec<f64>) -> Self {
        ModelParams(v)
    }
}

/// Min-max scaled features with integer labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::contract(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        Ok(LabeledDataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Per rep: H on all qubits, `P(2x_i)` on qubit i, then for each adjacent
/// pair `(i, i+1)`: `CX(i,i+1) · P(2(π−x_i)(π−x_{i+1})) on i+1 · CX(i,i+1)`.
pub fn feature_map_circuit(x: &[f64], cfg: &FeatureMapConfig) -> Result<Vec<Gate>> {
    let n = cfg.n_qubits;
    if x.len() != n {
        return Err(Error::contract(format!(
            "feature vector has {} entries, feature map expects {n}",
            x.len()
        )));
    }
    let mut gates = Vec::with_capacity(cfg.reps * (2 * n + 3 * n.saturating_sub(1)));
    for _ in 0..cfg.reps {
        gates.extend((0..n).map(Gate::H));
        gates.extend((0..n).map(|i| Gate::P(i, 2.0 * x[i])));
        for i in 0..n.saturating_sub(1) {
            let j = i + 1;
            let cx = Gate::Cx {
                control: i,
                target: j,
            };
            gates.push(cx);
            gates.push(Gate::P(j, 2.0 * (PI - x[i]) * (PI - x[j])));
            gates.push(cx);
        }
    }
    Ok(gates)
}

/// `reps + 1` layers of RY rotations with a linear CX chain between
/// consecutive layers. Angles are consumed layer-major, qubit-minor.
pub fn ansatz_circuit(params: &[f64], cfg: &AnsatzConfig) -> Result<Vec<Gate>> {
    let n = cfg.n_qubits;
    if params.len() != cfg.parameter_count() {
        return Err(Error::contract(format!(
            "ansatz expects {} parameters, got {}",
            cfg.parameter_count(),
            params.len()
        )));
    }
    let mut gates = Vec::with_capacity(params.len() + cfg.reps * n);
    for layer in 0..=cfg.reps {
        gates.extend((0..n).map(|q| Gate::Ry(q, params[layer * n + q])));
        if layer < cfg.reps {
            gates.extend((0..n.saturating_sub(1)).map(|q| Gate::Cx {
                control: q,
                target: q + 1,
            }));
        }
    }
    Ok(gates)
}

/// Folds a basis distribution into `n_classes` buckets by `index mod n_classes`.
pub fn fold_probabilities(basis: &[f64], n_classes: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_classes];
    for (i, p) in basis.iter().enumerate() {
        out[i % n_classes] += p;
    }
    out
}

/// Index of the largest entry, ties toward the smaller index.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vqc {
    pub feature_map: FeatureMapConfig,
    pub ansatz: AnsatzConfig,
    pub n_classes: usize,
}

impl Vqc {
    pub fn new(n_qubits: usize, ansatz_reps: usize, n_classes: usize) -> Result<Self> {
        let vqc = Vqc {
            feature_map: FeatureMapConfig { n_qubits, reps: 1 },
            ansatz: AnsatzConfig {
                n_qubits,
                reps: ansatz_reps,
            },
            n_classes,
        };
        vqc.validate()?;
        Ok(vqc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_map.n_qubits != self.ansatz.n_qubits {
            return Err(Error::config(
                "n_qubits",
                "feature map and ansatz qubit counts differ",
            ));
        }
        if self.feature_map.reps == 0 || self.ansatz.reps == 0 {
            return Err(Error::config("reps", "must be at least 1"));
        }
        let dim = 1usize << self.ansatz.n_qubits.min(usize::BITS as usize - 1);
        if self.n_classes < 1 || self.n_classes > dim {
            return Err(Error::config(
                "n_classes",
                format!("must be in 1..={dim}, got {}", self.n_classes),
            ));
        }
        StateVector::zero(self.ansatz.n_qubits)?;
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.ansatz.parameter_count()
    }

    /// Feature-map state for `x`; independent of the trainable angles.
    pub fn encode(&self, x: &[f64]) -> Result<StateVector> {
        let mut s = StateVector::zero(self.feature_map.n_qubits)?;
        s.apply_all(&feature_map_circuit(x, &self.feature_map)?)?;
        Ok(s)
    }

    fn check_params(&self, params: &ModelParams) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::contract(format!(
                "model has {} parameters, ansatz expects {}",
                params.len(),
                self.parameter_count()
            )));
        }
        Ok(())
    }

    fn class_probs_from_encoded(&self, encoded: &StateVector, ansatz: &[Gate]) -> Result<Vec<f64>> {
        let mut s = encoded.clone();
        s.apply_all(ansatz)?;
        Ok(fold_probabilities(&s.probabilities(), self.n_classes))
    }

    pub fn predict_proba(&self, params: &ModelParams, x: &[f64]) -> Result<Vec<f64>> {
        self.check_params(params)?;
        let ansatz = ansatz_circuit(params.as_slice(), &self.ansatz)?;
        self.class_probs_from_encoded(&self.encode(x)?, &ansatz)
    }

    /// Encodes every sample once so repeated loss evaluations only run the ansatz.
    pub fn encode_dataset(&self, data: &LabeledDataset) -> Result<EncodedDataset> {
        let states = data
            .features
            .iter()
            .map(|x| self.encode(x))
            .collect::<Result<Vec<_>>>()?;
        for &y in &data.labels {
            if y >= self.n_classes {
                return Err(Error::contract(format!(
                    "label {y} outside 0..{}",
                    self.n_classes
                )));
            }
        }
        Ok(EncodedDataset {
            states,
            labels: data.labels.clone(),
        })
    }

    pub fn loss(&self, params: &ModelParams, data: &LabeledDataset) -> Result<f64> {
        self.loss_encoded(params, &self.encode_dataset(data)?)
    }

    pub fn score(&self, params: &ModelParams, data: &LabeledDataset) -> Result<f64> {
        self.score_encoded(params, &self.encode_dataset(data)?)
    }

    /// Mean categorical cross-entropy with probabilities clamped at the floor.
    pub fn loss_encoded(&self, params: &ModelParams, data: &EncodedDataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::contract("loss of an empty dataset"));
        }
        self.check_params(params)?;
        let ansatz = ansatz_circuit(params.as_slice(), &self.ansatz)?;
        let mut total = 0.0;
        for (s, &y) in data.states.iter().zip(&data.labels) {
            let p = self.class_probs_from_encoded(s, &ansatz)?;
            total -= p[y].max(tolerance::PROB_FLOOR).ln();
        }
        Ok(total / data.len() as f64)
    }

    pub fn score_encoded(&self, params: &ModelParams, data: &EncodedDataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::contract("score of an empty dataset"));
        }
        self.check_params(params)?;
        let ansatz = ansatz_circuit(params.as_slice(), &self.ansatz)?;
        let mut correct = 0usize;
        for (s, &y) in data.states.iter().zip(&data.labels) {
            if argmax(&self.class_probs_from_encoded(s, &ansatz)?) == y {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }

    /// Loss and accuracy from a single pass.
    pub fn evaluate_encoded(
        &self,
        params: &ModelParams,
        data: &EncodedDataset,
    ) -> Result<(f64, f64)> {
        if data.is_empty() {
            return Err(Error::contract("evaluation of an empty dataset"));
        }
        self.check_params(params)?;
        let ansatz = ansatz_circuit(params.as_slice(), &self.ansatz)?;
        let (mut loss, mut correct) = (0.0, 0usize);
        for (s, &y) in data.states.iter().zip(&data.labels) {
            let p = self.class_probs_from_encoded(s, &ansatz)?;
            loss -= p[y].max(tolerance::PROB_FLOOR).ln();
            if argmax(&p) == y {
                correct += 1;
            }
        }
        let m = data.len() as f64;
        Ok((loss / m, correct as f64 / m))
    }

    /// Gradient of the cross-entropy loss. The per-sample label probability
    /// is differentiated with the ±π/2 parameter-shift rule (exact for RY
    /// angles) and combined through `d(−ln p) = −dp / p`.
    pub fn loss_gradient_parameter_shift(
        &self,
        params: &ModelParams,
        data: &EncodedDataset,
    ) -> Result<Vec<f64>> {
        if data.is_empty() {
            return Err(Error::contract("gradient of an empty dataset"));
        }
        self.check_params(params)?;
        let n = params.len();
        let base = ansatz_circuit(params.as_slice(), &self.ansatz)?;
        let base_probs = data
            .states
            .iter()
            .zip(&data.labels)
            .map(|(s, &y)| Ok(self.class_probs_from_encoded(s, &base)?[y]))
            .collect::<Result<Vec<f64>>>()?;

        let mut grad = vec![0.0; n];
        let mut shifted = params.0.clone();
        for (k, g) in grad.iter_mut().enumerate() {
            shifted[k] = params.0[k] + FRAC_PI_2;
            let plus = ansatz_circuit(&shifted, &self.ansatz)?;
            shifted[k] = params.0[k] - FRAC_PI_2;
            let minus = ansatz_circuit(&shifted, &self.ansatz)?;
            shifted[k] = params.0[k];
            let mut acc = 0.0;
            for ((s, &y), &p) in data.states.iter().zip(&data.labels).zip(&base_probs) {
                let dp = 0.5
                    * (self.class_probs_from_encoded(s, &plus)?[y]
                        - self.class_probs_from_encoded(s, &minus)?[y]);
                // below the clamp the loss is flat in p
                if p > tolerance::PROB_FLOOR {
                    acc -= dp / p;
                }
            }
            *g = acc / data.len() as f64;
        }
        Ok(grad)
    }
}

/// Feature-map states cached for a dataset.
#[derive(Debug, Clone)]
pub struct EncodedDataset {
    states: Vec<StateVector>,
    labels: Vec<usize>,
}

impl EncodedDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}
