use super::{Counted, Objective, OptRunResult, OptimizerConfig, RadiusSchedule};
use crate::error::Result;

/// Acceptance threshold on actual/predicted decrease.
const MIN_RATIO: f64 = 0.1;

/// Linear-model trust-region iteration.
///
/// Each iteration interpolates a linear model on the simplex
/// `{c, c + sΔ e_1, …, c + sΔ e_n}`, steps to the model minimizer on the ball
/// `‖d‖ ≤ Δ`, and moves the center to the best point seen. The orientation
/// `s = ±1` flips after an iteration that found no better point, so kinks
/// where every forward vertex is worse do not stall the search. One iteration
/// spends at most `n + 1` evaluations, plus one for the starting point.
pub(super) fn run<O: Objective + ?Sized>(
    f: &mut Counted<'_, O>,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptRunResult> {
    let n = x0.len();
    let mut center = x0.to_vec();
    let mut f_center = f.eval(&center)?;
    let mut delta = cfg.rho_begin;
    let mut sign = 1.0;
    let mut value_history = Vec::with_capacity(cfg.maxiter);
    let mut radius_history = Vec::with_capacity(cfg.maxiter);

    for t in 1..=cfg.maxiter {
        let radius = match cfg.radius_schedule {
            RadiusSchedule::Adaptive => delta,
            RadiusSchedule::InverseT => cfg.rho_begin / t as f64,
        };

        let mut grad = vec![0.0; n];
        let mut best_vertex: Option<(Vec<f64>, f64)> = None;
        let mut vertex = center.clone();
        for i in 0..n {
            vertex[i] = center[i] + sign * radius;
            let fv = f.eval(&vertex)?;
            grad[i] = (fv - f_center) / (sign * radius);
            if fv < f_center && best_vertex.as_ref().is_none_or(|(_, b)| fv < *b) {
                best_vertex = Some((vertex.clone(), fv));
            }
            vertex[i] = center[i];
        }

        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let mut ratio = 0.0;
        let mut best_trial: Option<(Vec<f64>, f64)> = None;
        if gnorm > 0.0 {
            let trial: Vec<f64> = center
                .iter()
                .zip(&grad)
                .map(|(c, g)| c - radius * g / gnorm)
                .collect();
            let ft = f.eval(&trial)?;
            ratio = (f_center - ft) / (radius * gnorm);
            if ft < f_center {
                best_trial = Some((trial, ft));
            }
        }

        // the model step wins ties against simplex vertices
        let candidate = match (best_trial, best_vertex) {
            (Some(t), Some(v)) => Some(if v.1 < t.1 { v } else { t }),
            (t, v) => t.or(v),
        };
        match candidate {
            Some((x, fx)) => {
                center = x;
                f_center = fx;
            }
            None => sign = -sign,
        }

        radius_history.push(radius);
        value_history.push(f_center);

        if cfg.radius_schedule == RadiusSchedule::Adaptive && ratio < MIN_RATIO {
            if delta <= cfg.rho_end {
                break;
            }
            delta = (delta * 0.5).max(cfg.rho_end);
        }
    }

    Ok(OptRunResult {
        best_params: center,
        best_value: f_center,
        value_history,
        radius_history,
        evaluations: f.evaluations,
    })
}
