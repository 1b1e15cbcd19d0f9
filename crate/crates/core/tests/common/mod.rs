//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2;

use mdqfl_core::orchestrator::{FitOutcome, LocalLearner};
use mdqfl_core::statevec::Gate;
use mdqfl_core::vqc::{LabeledDataset, ModelParams};
use mdqfl_core::Result;
use num_complex::Complex64;
use rand::Rng;

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn identity2() -> Matrix {
    vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0)],
    ]
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

/// Tensor product with qubit 0 as the rightmost (least significant) factor.
fn embed(ops: &[(usize, Matrix)], n: usize) -> Matrix {
    let mut out = vec![vec![c(1.0, 0.0)]];
    for q in (0..n).rev() {
        let m = ops
            .iter()
            .find(|(qq, _)| *qq == q)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(identity2);
        out = kron(&out, &m);
    }
    out
}

fn one_qubit(gate: &Gate) -> Matrix {
    match *gate {
        Gate::H(_) => {
            let h = FRAC_1_SQRT_2;
            vec![vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]]
        }
        Gate::Ry(_, t) => vec![
            vec![c((t / 2.0).cos(), 0.0), c(-(t / 2.0).sin(), 0.0)],
            vec![c((t / 2.0).sin(), 0.0), c((t / 2.0).cos(), 0.0)],
        ],
        Gate::Rz(_, t) => vec![
            vec![c((t / 2.0).cos(), -(t / 2.0).sin()), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c((t / 2.0).cos(), (t / 2.0).sin())],
        ],
        Gate::P(_, l) => vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(l.cos(), l.sin())],
        ],
        Gate::Cx { .. } => unreachable!(),
    }
}

/// Full `2^n × 2^n` unitary of one gate.
pub fn dense_unitary(gate: &Gate, n: usize) -> Matrix {
    match *gate {
        Gate::Cx { control, target } => {
            let p0 = vec![
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 0.0)],
            ];
            let p1 = vec![
                vec![c(0.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0)],
            ];
            let x = vec![
                vec![c(0.0, 0.0), c(1.0, 0.0)],
                vec![c(1.0, 0.0), c(0.0, 0.0)],
            ];
            add(
                &embed(&[(control, p0)], n),
                &embed(&[(control, p1), (target, x)], n),
            )
        }
        _ => embed(&[(gate.target(), one_qubit(gate))], n),
    }
}

pub fn matvec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Applies a gate list to |0…0⟩ by dense matrix products.
pub fn dense_run(gates: &[Gate], n: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(1.0, 0.0);
    for g in gates {
        v = matvec(&dense_unitary(g, n), &v);
    }
    v
}

pub fn random_gate<R: Rng>(rng: &mut R, n: usize) -> Gate {
    let q = rng.random_range(0..n);
    let angle = rng.random_range(-2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI);
    match rng.random_range(0..if n > 1 { 5 } else { 4 }) {
        0 => Gate::H(q),
        1 => Gate::Ry(q, angle),
        2 => Gate::Rz(q, angle),
        3 => Gate::P(q, angle),
        _ => {
            let mut t = rng.random_range(0..n - 1);
            if t >= q {
                t += 1;
            }
            Gate::Cx {
                control: q,
                target: t,
            }
        }
    }
}

/// Cyclic Jacobi eigenvalue iteration for a real symmetric matrix.
/// Returns `(eigenvalues, eigenvectors as columns)`, unsorted.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = cs * vp - sn * vq;
                    row[q] = sn * vp + cs * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Sample covariance with the `m − 1` denominator.
pub fn covariance(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = x.len();
    let d = x[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / m as f64)
        .collect();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    x.iter()
                        .map(|r| (r[i] - mean[i]) * (r[j] - mean[j]))
                        .sum::<f64>()
                        / (m - 1) as f64
                })
                .collect()
        })
        .collect()
}

/// Labels device `i` holds under the l-cycle rule, by enumeration.
pub fn lcycle_labels(device: usize, n_class: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n_class).map(|j| (device + j) % 10).collect();
    v.sort_unstable();
    v
}

/// Learner whose "training" moves halfway towards the mean feature row of
/// its data, padded or cut to the parameter count. Cheap and deterministic.
#[derive(Debug, Clone)]
pub struct TargetLearner {
    pub dim: usize,
}

impl LocalLearner for TargetLearner {
    type Data = Vec<f64>;

    fn parameter_count(&self) -> usize {
        self.dim
    }

    fn prepare(&self, data: &LabeledDataset) -> Result<Vec<f64>> {
        let m = data.len() as f64;
        Ok((0..self.dim)
            .map(|j| {
                data.features
                    .iter()
                    .map(|r| r.get(j).copied().unwrap_or(0.0))
                    .sum::<f64>()
                    / m
            })
            .collect())
    }

    fn fit(&self, start: &ModelParams, target: &Vec<f64>) -> Result<FitOutcome> {
        let params: Vec<f64> = start
            .0
            .iter()
            .zip(target)
            .map(|(s, t)| s + 0.5 * (t - s))
            .collect();
        let loss = dist(&params, target);
        Ok(FitOutcome {
            params: ModelParams(params),
            loss,
            evaluations: 1,
        })
    }

    fn evaluate(&self, params: &ModelParams, target: &Vec<f64>) -> Result<(f64, f64)> {
        let d = dist(&params.0, target);
        Ok((d, 1.0 / (1.0 + d)))
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `n` devices whose data mean sits at one of `groups` well-separated
/// points, plus a small per-device offset.
pub fn grouped_devices(
    n: usize,
    groups: usize,
    dim: usize,
) -> Vec<(usize, LabeledDataset, LabeledDataset)> {
    (0..n)
        .map(|i| {
            let g = i % groups;
            let row: Vec<f64> = (0..dim)
                .map(|j| 10.0 * g as f64 + 0.01 * ((i * 7 + j) % 5) as f64)
                .collect();
            let ds = LabeledDataset::new(vec![row.clone(), row], vec![0, 0]).unwrap();
            (i, ds.clone(), ds)
        })
        .collect()
}
