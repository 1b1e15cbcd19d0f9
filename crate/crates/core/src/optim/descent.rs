use super::{Counted, GradientMethod, Objective, OptRunResult, OptimizerConfig, OptimizerKind};
use crate::error::Result;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// First-order loop: evaluate `f(x_t)`, take the gradient, step.
///
/// The iterate produced by the last step is not evaluated, which keeps the
/// cost at `2n + 1` evaluations per iteration.
pub(super) fn run<O: Objective + ?Sized>(
    f: &mut Counted<'_, O>,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptRunResult> {
    let n = x0.len();
    let method = match cfg.kind {
        OptimizerKind::Aqgd => GradientMethod::ParameterShift,
        _ => GradientMethod::CentralFd,
    };
    let lr = cfg.learning_rate;
    let mut x = x0.to_vec();
    let mut best = (x.clone(), f64::INFINITY);
    let mut value_history = Vec::with_capacity(cfg.maxiter);

    // adam moments, or the previous update for momentum descent
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];

    for t in 1..=cfg.maxiter {
        let fx = f.eval(&x)?;
        value_history.push(fx);
        if fx < best.1 {
            best = (x.clone(), fx);
        }
        let g = f.gradient(&x, method)?;
        match cfg.kind {
            OptimizerKind::Adam => {
                let (b1t, b2t) = (
                    1.0 - ADAM_BETA1.powi(t as i32),
                    1.0 - ADAM_BETA2.powi(t as i32),
                );
                for i in 0..n {
                    m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                    v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                    x[i] -= lr * (m[i] / b1t) / ((v[i] / b2t).sqrt() + ADAM_EPS);
                }
            }
            OptimizerKind::Aqgd => {
                for i in 0..n {
                    m[i] = (1.0 - cfg.momentum) * lr * g[i] + cfg.momentum * m[i];
                    x[i] -= m[i];
                }
            }
            _ => {
                for i in 0..n {
                    x[i] -= lr * g[i];
                }
            }
        }
    }

    Ok(OptRunResult {
        best_params: best.0,
        best_value: best.1,
        value_history,
        radius_history: Vec::new(),
        evaluations: f.evaluations,
    })
}
