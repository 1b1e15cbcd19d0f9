//! Scalar minimizers for local training.
//!
//! `cobyla` is a derivative-free linear-model trust-region method;
//! `gd`, `adam` and `aqgd` are first-order methods using central finite
//! differences (`gd`, `adam`) or the parameter-shift rule (`aqgd`).

mod cobyla;
mod descent;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Cobyla,
    Gd,
    Adam,
    Aqgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RadiusSchedule {
    /// Halve the radius whenever a step fails to realize a tenth of the predicted decrease.
    #[default]
    Adaptive,
    /// Force `Δ_t = Δ_0 / t`.
    InverseT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    CentralFd,
    ParameterShift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub maxiter: usize,
    pub learning_rate: f64,
    pub rho_begin: f64,
    pub rho_end: f64,
    pub radius_schedule: RadiusSchedule,
    /// Momentum of the parameter-shift method.
    pub momentum: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Cobyla,
            maxiter: 5,
            learning_rate: 0.1,
            rho_begin: 1.0,
            rho_end: 1e-4,
            radius_schedule: RadiusSchedule::Adaptive,
            momentum: 0.25,
        }
    }
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind, maxiter: usize) -> Self {
        OptimizerConfig {
            kind,
            maxiter,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.maxiter == 0 {
            return Err(Error::config("optimizer.maxiter", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("optimizer.learning_rate", "must be positive"));
        }
        if !(self.rho_begin > 0.0 && self.rho_begin.is_finite()) {
            return Err(Error::config("optimizer.rho_begin", "must be positive"));
        }
        if !(self.rho_end > 0.0 && self.rho_end < self.rho_begin) {
            return Err(Error::config(
                "optimizer.rho_end",
                "must be positive and below rho_begin",
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config("optimizer.momentum", "must be in [0, 1)"));
        }
        Ok(())
    }

    /// Upper bound on objective evaluations for `dim` parameters.
    pub fn evaluation_budget(&self, dim: usize) -> usize {
        match self.kind {
            OptimizerKind::Cobyla => self.maxiter * (dim + 2),
            _ => self.maxiter * (2 * dim + 1),
        }
    }
}

/// Scalar objective. Closures `FnMut(&[f64]) -> f64` implement it directly.
pub trait Objective {
    fn value(&mut self, x: &[f64]) -> f64;

    /// An exact parameter-shift gradient, when the objective can provide
    /// one more accurately than shifting the black-box value.
    fn parameter_shift_gradient(&mut self, _x: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }
}

impl<F: FnMut(&[f64]) -> f64> Objective for F {
    fn value(&mut self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptRunResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub value_history: Vec<f64>,
    /// Trust radius used at each iteration; empty for gradient methods.
    pub radius_history: Vec<f64>,
    pub evaluations: usize,
}

/// Counts evaluations and rejects non-finite values.
pub(crate) struct Counted<'a, O: Objective + ?Sized> {
    inner: &'a mut O,
    pub evaluations: usize,
}

impl<'a, O: Objective + ?Sized> Counted<'a, O> {
    pub fn new(inner: &'a mut O) -> Self {
        Counted {
            inner,
            evaluations: 0,
        }
    }

    pub fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let v = self.inner.value(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                value: v,
                point: x.to_vec(),
            })
        }
    }

    pub fn gradient(&mut self, x: &[f64], method: GradientMethod) -> Result<Vec<f64>> {
        if method == GradientMethod::ParameterShift {
            if let Some(g) = self.inner.parameter_shift_gradient(x) {
                self.evaluations += 2 * x.len();
                let g = g?;
                if let Some(bad) = g.iter().find(|v| !v.is_finite()) {
                    return Err(Error::NonFinite {
                        value: *bad,
                        point: x.to_vec(),
                    });
                }
                return Ok(g);
            }
        }
        let (shift, scale) = match method {
            GradientMethod::CentralFd => (tolerance::FD_STEP, 1.0 / (2.0 * tolerance::FD_STEP)),
            GradientMethod::ParameterShift => (FRAC_PI_2, 0.5),
        };
        let mut probe = x.to_vec();
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() {
            probe[i] = x[i] + shift;
            let plus = self.eval(&probe)?;
            probe[i] = x[i] - shift;
            let minus = self.eval(&probe)?;
            probe[i] = x[i];
            g[i] = scale * (plus - minus);
        }
        Ok(g)
    }
}

/// Minimizes `objective` from `x0`.
pub fn minimize<O: Objective + ?Sized>(
    objective: &mut O,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptRunResult> {
    cfg.validate()?;
    if x0.is_empty() {
        return Err(Error::contract("cannot optimize a zero-dimensional point"));
    }
    let mut counted = Counted::new(objective);
    match cfg.kind {
        OptimizerKind::Cobyla => cobyla::run(&mut counted, x0, cfg),
        OptimizerKind::Gd | OptimizerKind::Adam | OptimizerKind::Aqgd => {
            descent::run(&mut counted, x0, cfg)
        }
    }
}

/// Partial derivatives of `objective` at `x`.
///
/// `ParameterShift` evaluates `[f(x + π/2 e_i) − f(x − π/2 e_i)] / 2`, which
/// is exact only for objectives that are first-order trigonometric in each
/// coordinate.
pub fn gradient<O: Objective + ?Sized>(
    objective: &mut O,
    x: &[f64],
    method: GradientMethod,
) -> Result<Vec<f64>> {
    Counted::new(objective).gradient(x, method)
}

/// Checks `Σ_t [f(θ_t) − f*] ≤ L · Σ_t Δ_t` over a recorded trust-region run.
pub fn regret_upper_bound_check(
    result: &OptRunResult,
    lipschitz: f64,
    f_star: f64,
) -> Result<bool> {
    if result.radius_history.is_empty() {
        return Err(Error::contract(
            "regret check needs the radius history of a trust-region run",
        ));
    }
    if result.radius_history.len() != result.value_history.len() {
        return Err(Error::contract(
            "value and radius histories differ in length",
        ));
    }
    let regret: f64 = result.value_history.iter().map(|v| v - f_star).sum();
    let bound: f64 = lipschitz * result.radius_history.iter().sum::<f64>();
    Ok(regret <= bound + 1e-12 * bound.abs().max(1.0))
}
