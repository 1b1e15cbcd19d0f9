//! Acceptance checks. Runs as a plain binary (`harness = false`) so that
//! every criterion prints one PASS/FAIL line under `cargo test`.

mod common;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use mdqfl_core::cluster::{cluster_count, ClusterConfig, KMeansInit};
use mdqfl_core::comm::{
    modeled_time_mdqfl, modeled_time_qfl, performance_improvement, CommModelParams,
};
use mdqfl_core::config::ExperimentConfig;
use mdqfl_core::data::{lcycle_distribute, PcaModel};
use mdqfl_core::experiment::check_round_counts;
use mdqfl_core::metrics::{persist_metrics, read_metrics_csv, RoundMetrics, Summary};
use mdqfl_core::optim::{
    gradient, minimize, regret_upper_bound_check, GradientMethod, OptimizerConfig, OptimizerKind,
    RadiusSchedule,
};
use mdqfl_core::orchestrator::{Federation, PersonalizationPolicy, Protocol, ProtocolSettings};
use mdqfl_core::run_experiment;
use mdqfl_core::statevec::StateVector;
use mdqfl_core::vqc::{LabeledDataset, ModelParams, Vqc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn smoke() -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke.toml");
    ExperimentConfig::from_path(&path).expect("shipped smoke config")
}

fn stub_federation(n: usize, groups: usize) -> Federation<TargetLearner> {
    let val = LabeledDataset::new(vec![vec![0.0; 3]], vec![0]).unwrap();
    let settings = ProtocolSettings {
        clustering: ClusterConfig {
            kmeans_init: KMeansInit::FarthestPoint,
            ..ClusterConfig::default()
        },
        ..ProtocolSettings::default()
    };
    Federation::new(
        TargetLearner { dim: 3 },
        grouped_devices(n, groups, 3),
        &val,
        &val,
        settings,
    )
    .unwrap()
}

fn communication_reduction() -> Outcome {
    let comm = CommModelParams::default();
    let mut notes = Vec::new();
    for (n, groups) in [(50usize, 5usize), (200, 10)] {
        let k = cluster_count(n);
        let mut md = stub_federation(n, groups);
        let mut qfl = stub_federation(n, groups);
        let md_rounds = md.run(Protocol::Mdqfl, 3).map_err(|e| e.to_string())?;
        let q_rounds = qfl.run(Protocol::Qfl, 3).map_err(|e| e.to_string())?;
        for (m, q) in md_rounds[1..].iter().zip(&q_rounds[1..]) {
            ensure(m.trainings == k && q.trainings == n, || {
                format!(
                    "n={n}: counted {} vs {} trainings, expected {k} vs {n}",
                    m.trainings, q.trainings
                )
            })?;
            ensure(m.comm_events == k + 1 && q.comm_events == n, || {
                format!("n={n}: event counts off")
            })?;
            ensure(
                (m.modeled_t_total - modeled_time_mdqfl(n, &comm).unwrap().t_total).abs() < 1e-12
                    && (q.modeled_t_total - modeled_time_qfl(n, &comm).unwrap().t_total).abs()
                        < 1e-12,
                || format!("n={n}: orchestrator modeled time differs from the formula"),
            )?;
        }
        let ratio = performance_improvement(n, &comm).map_err(|e| e.to_string())?;
        let identity =
            (comm.alpha + comm.c_d) * n as f64 / ((comm.alpha + comm.c_d) * k as f64 + comm.c_agg);
        ensure((ratio - identity).abs() < 1e-12, || {
            format!("n={n}: ratio {ratio} vs identity {identity}")
        })?;
        notes.push(format!("n={n}: {k} vs {n} trainings, ratio {ratio:.6}"));
    }
    ensure(cluster_count(50) == 5, || {
        "cluster count for 50 is not 5".into()
    })?;
    let r50 = performance_improvement(50, &comm).unwrap();
    ensure((r50 - 100.0 / 11.0).abs() < 1e-12, || {
        format!("n=50 ratio {r50} != 100/11")
    })?;
    ensure(cluster_count(200) * 20 == 200, || {
        "event ratio for 200 is not 20:1".into()
    })?;
    Ok(notes.join("; "))
}

fn training_count_law() -> Outcome {
    let mut notes = Vec::new();
    for protocol in [Protocol::Mdqfl, Protocol::Qfl] {
        let mut cfg = smoke();
        cfg.protocol = protocol;
        ensure(
            cfg.n_devices == 10 && cfg.rounds == 3 && cfg.optimizer.maxiter == 5,
            || "smoke config no longer matches 10 devices, R = 3, maxiter = 5".into(),
        )?;
        let run = run_experiment(&cfg).map_err(|e| e.to_string())?;
        ensure(run.active_devices == 10, || {
            format!("{} devices active", run.active_devices)
        })?;
        let total: usize = run.metrics.iter().map(|m| m.trainings).sum();
        let expected = match protocol {
            Protocol::Qfl => 30,
            Protocol::Mdqfl => {
                let ks: Vec<usize> = run.metrics[1..].iter().map(|m| m.clusters).collect();
                ensure(ks.iter().all(|&k| k == cluster_count(10)), || {
                    format!("cluster counts {ks:?}")
                })?;
                10 + ks.iter().sum::<usize>()
            }
        };
        ensure(total == expected, || {
            format!(
                "{}: {total} trainings, expected {expected}",
                protocol.name()
            )
        })?;
        check_round_counts(protocol, 10, &run.metrics).map_err(|e| e.to_string())?;
        notes.push(format!("{} {total}", protocol.name()));
    }
    Ok(notes.join(", "))
}

fn blobs_config(n_class: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(&format!(
        r#"
protocol = "qfl"
n_devices = 10
rounds = 5
n_class = {n_class}
[seeds]
data = {seed}
split = {split}
device = {device}
[dataset]
n_train = 500
n_test = 200
source = {{ kind = "synthetic_blobs", n_classes = 10, dim = 64 }}
"#,
        split = seed + 100,
        device = seed + 200
    ))
    .unwrap()
}

fn non_iid_direction() -> Outcome {
    let mut means = Vec::new();
    for n_class in [8, 2] {
        let mut acc = 0.0;
        for seed in 0..3 {
            let run = run_experiment(&blobs_config(n_class, seed)).map_err(|e| e.to_string())?;
            acc += run.metrics.last().unwrap().server_test_acc;
        }
        means.push(acc / 3.0);
    }
    ensure(means[0] >= means[1], || {
        format!(
            "mean final test accuracy C=8 {:.4} < C=2 {:.4}",
            means[0], means[1]
        )
    })?;
    Ok(format!(
        "mean final test accuracy C=8 {:.4} >= C=2 {:.4}",
        means[0], means[1]
    ))
}

fn separable_config(protocol: Protocol, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_toml_str(&format!(
        r#"
n_devices = 10
rounds = 5
n_class = 10
[seeds]
data = {seed}
split = {split}
device = {device}
[dataset]
n_train = 500
n_test = 200
source = {{ kind = "separable", dim = 4 }}
[optimizer]
kind = "adam"
maxiter = 10
[clustering]
seed = {seed}
"#,
        split = seed + 100,
        device = seed + 200
    ))
    .unwrap();
    cfg.protocol = protocol;
    cfg
}

fn learning_progress() -> Outcome {
    let mut notes = Vec::new();
    for protocol in [Protocol::Qfl, Protocol::Mdqfl] {
        for seed in 0..3 {
            let run =
                run_experiment(&separable_config(protocol, seed)).map_err(|e| e.to_string())?;
            let (first, last) = (&run.metrics[0], &run.metrics[4]);
            ensure(last.server_val_loss <= first.server_val_loss, || {
                format!(
                    "{} seed {seed}: validation loss {:.4} -> {:.4}",
                    protocol.name(),
                    first.server_val_loss,
                    last.server_val_loss
                )
            })?;
            if protocol == Protocol::Mdqfl {
                ensure(
                    last.avg_device_train_acc > first.avg_device_train_acc,
                    || {
                        format!(
                            "mdqfl seed {seed}: device train accuracy {:.4} -> {:.4}",
                            first.avg_device_train_acc, last.avg_device_train_acc
                        )
                    },
                )?;
                notes.push(format!(
                    "{:.3}->{:.3}",
                    first.avg_device_train_acc, last.avg_device_train_acc
                ));
            }
        }
    }
    Ok(format!(
        "losses non-increasing on all seeds; mdqfl device train acc {}",
        notes.join(", ")
    ))
}

fn optimizer_suite() -> Outcome {
    for kind in [
        OptimizerKind::Cobyla,
        OptimizerKind::Gd,
        OptimizerKind::Adam,
        OptimizerKind::Aqgd,
    ] {
        let mut cfg = OptimizerConfig::new(kind, 100);
        cfg.learning_rate = 0.3;
        let mut f = |x: &[f64]| (x[0] - 3.0).powi(2);
        let r = minimize(&mut f, &[0.0], &cfg).map_err(|e| e.to_string())?;
        ensure((r.best_params[0] - 3.0).abs() < 1e-3, || {
            format!("{kind:?} stopped at {}", r.best_params[0])
        })?;
        ensure(r.evaluations <= cfg.evaluation_budget(1), || {
            format!("{kind:?} used {} evaluations", r.evaluations)
        })?;
    }

    let trig: [fn(&[f64]) -> f64; 3] = [
        |x| x[0].sin() * x[1].cos() + 0.5 * (x[2] + 0.3).sin(),
        |x| x.iter().map(|v| v.cos()).product::<f64>(),
        |x| (x[0] - 0.2).cos() * (x[1] + 1.1).sin() - 2.0 * x[2].cos() * x[0].sin(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut worst: f64 = 0.0;
    for f in trig {
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-PI..PI)).collect();
            let mut g = f;
            let ps = gradient(&mut g, &x, GradientMethod::ParameterShift).unwrap();
            let fd = gradient(&mut g, &x, GradientMethod::CentralFd).unwrap();
            worst = ps
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b).abs())
                .fold(worst, f64::max);
        }
    }
    ensure(worst < 1e-8, || {
        format!("trigonometric gradients differ by {worst:e}")
    })?;

    let vqc = Vqc::new(4, 3, 10).unwrap();
    let sample = LabeledDataset::new(vec![vec![0.3, 0.8, 0.1, 0.55]], vec![7]).unwrap();
    let enc = vqc.encode_dataset(&sample).unwrap();
    let mut worst_vqc: f64 = 0.0;
    for _ in 0..5 {
        let p = ModelParams((0..16).map(|_| rng.random_range(-PI..PI)).collect());
        let ps = vqc.loss_gradient_parameter_shift(&p, &enc).unwrap();
        let mut f = |x: &[f64]| vqc.loss(&ModelParams(x.to_vec()), &sample).unwrap();
        let fd = gradient(&mut f, &p.0, GradientMethod::CentralFd).unwrap();
        worst_vqc = ps
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b).abs())
            .fold(worst_vqc, f64::max);
    }
    ensure(worst_vqc < 1e-5, || {
        format!("VQC loss gradients differ by {worst_vqc:e}")
    })?;

    let mut cfg = OptimizerConfig::new(OptimizerKind::Cobyla, 25);
    cfg.radius_schedule = RadiusSchedule::InverseT;
    cfg.rho_begin = 0.8;
    let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + x[1].sin();
    let r = minimize(&mut f, &[0.0, 0.0], &cfg).unwrap();
    ensure(r.radius_history.len() == 25, || {
        "inverse_t run stopped early".into()
    })?;
    for (t, &d) in r.radius_history.iter().enumerate() {
        ensure(d == 0.8 / (t + 1) as f64, || {
            format!("radius {d} at t={}", t + 1)
        })?;
    }

    // Lipschitz objectives with their constants and minima, started inside
    // the initial trust region around the minimizer
    let c = [0.4, -0.7, 1.2];
    let lipschitz: [(&str, fn(&[f64]) -> f64, f64); 3] = [
        (
            "euclidean",
            |x| {
                x.iter()
                    .zip([0.4, -0.7, 1.2])
                    .map(|(v, c)| (v - c).powi(2))
                    .sum::<f64>()
                    .sqrt()
            },
            1.0,
        ),
        (
            "l1",
            |x| {
                x.iter()
                    .zip([0.4, -0.7, 1.2])
                    .map(|(v, c)| (v - c).abs())
                    .sum()
            },
            3f64.sqrt(),
        ),
        (
            "pseudo-huber",
            |x| {
                x.iter()
                    .zip([0.4, -0.7, 1.2])
                    .map(|(v, c)| (1.0 + (v - c).powi(2)).sqrt() - 1.0)
                    .sum()
            },
            3f64.sqrt(),
        ),
    ];
    for (name, f, l) in lipschitz {
        for start in [[0.2, 0.1, -0.3], [-0.5, 0.0, 0.4]] {
            let x0: Vec<f64> = c.iter().zip(start).map(|(c, s)| c + s).collect();
            let mut cfg = OptimizerConfig::new(OptimizerKind::Cobyla, 30);
            cfg.radius_schedule = RadiusSchedule::InverseT;
            let mut g = f;
            let r = minimize(&mut g, &x0, &cfg).unwrap();
            let ok = regret_upper_bound_check(&r, l, 0.0).map_err(|e| e.to_string())?;
            ensure(ok, || {
                format!("regret bound violated on {name} from {start:?}")
            })?;
        }
    }
    Ok(format!(
        "trig max diff {worst:.1e}, VQC max diff {worst_vqc:.1e}"
    ))
}

fn quantum_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let n = 1 + case % 3;
        let len = rng.random_range(1..=20);
        let gates: Vec<_> = (0..len).map(|_| random_gate(&mut rng, n)).collect();
        let mut sv = StateVector::zero(n).unwrap();
        sv.apply_all(&gates).map_err(|e| e.to_string())?;
        let oracle = dense_run(&gates, n);
        worst = sv
            .amplitudes()
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).norm())
            .fold(worst, f64::max);
    }
    ensure(worst < 1e-10, || {
        format!("max amplitude deviation {worst:e}")
    })?;
    let mut drift: f64 = 0.0;
    for seq in 0..200 {
        let n = 1 + seq % 3;
        let mut sv = StateVector::zero(n).unwrap();
        for _ in 0..100 {
            sv.apply(&random_gate(&mut rng, n)).unwrap();
        }
        drift = drift.max((sv.norm_sqr() - 1.0).abs());
    }
    ensure(drift < 1e-9, || format!("norm drift {drift:e}"))?;
    Ok(format!("max deviation {worst:.1e}, norm drift {drift:.1e}"))
}

fn pipeline_exactness() -> Outcome {
    // three rows per label, features tagged with the row index
    let y: Vec<usize> = (0..30).map(|i| i % 10).collect();
    let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
    let mut checked = 0;
    for n in 1..=50 {
        for c in [2, 3, 5, 8, 10] {
            let shards = lcycle_distribute(&x, &y, n, c).map_err(|e| e.to_string())?;
            ensure(shards.len() == n, || {
                format!("n={n}: {} shards", shards.len())
            })?;
            for (i, s) in shards.iter().enumerate() {
                let allowed = lcycle_labels(i, c);
                let want: Vec<f64> = (0..30)
                    .filter(|r| allowed.contains(&(r % 10)))
                    .map(|r| r as f64)
                    .collect();
                let got: Vec<f64> = s.features.iter().map(|r| r[0]).collect();
                ensure(got == want, || {
                    format!("n={n} c={c} device {i}: rows {got:?}")
                })?;
                checked += 1;
            }
        }
    }
    let shards = lcycle_distribute(&x, &y, 10, 2).unwrap();
    for i in 0..10 {
        let a = lcycle_labels(i, 2);
        let b = lcycle_labels((i + 1) % 10, 2);
        let shared = a.iter().filter(|l| b.contains(l)).count();
        let in_shard: Vec<usize> = shards[i].labels.clone();
        ensure(
            shared == 1 && in_shard.iter().all(|l| a.contains(l)),
            || format!("devices {i},{}", (i + 1) % 10),
        )?;
    }

    let fixtures = [
        vec![
            vec![4.0, 2.0, 0.6],
            vec![4.2, 2.1, 0.59],
            vec![3.9, 2.0, 0.58],
            vec![4.3, 2.1, 0.62],
            vec![4.1, 2.2, 0.63],
        ],
        vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.5],
            vec![2.0, -1.0],
            vec![0.5, 0.5],
            vec![-0.3, 2.0],
        ],
    ];
    let mut worst: f64 = 0.0;
    for x in &fixtures {
        let d = x[0].len();
        let (vals, vecs) = jacobi_eigen(&covariance(x));
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        let pca = PcaModel::fit(x, d).map_err(|e| e.to_string())?;
        for (k, &idx) in order.iter().enumerate() {
            worst = worst.max((pca.explained_variance[k] - vals[idx]).abs());
            let v: Vec<f64> = (0..d).map(|r| vecs[r][idx]).collect();
            let dot: f64 = v.iter().zip(&pca.components[k]).map(|(a, b)| a * b).sum();
            worst = worst.max(1.0 - dot.abs());
        }
    }
    ensure(worst < 1e-8, || {
        format!("PCA deviates from the oracle by {worst:e}")
    })?;
    Ok(format!(
        "{checked} shards checked, PCA max deviation {worst:.1e}"
    ))
}

fn metrics_bytes(cfg: &ExperimentConfig) -> Result<Vec<u8>, String> {
    let run = run_experiment(cfg).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files = persist_metrics(&run.metrics, cfg, dir.path()).map_err(|e| e.to_string())?;
    std::fs::read(files.metrics_csv).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let base = smoke();
    let reference = metrics_bytes(&base)?;
    ensure(reference == metrics_bytes(&base)?, || {
        "repeat run differs".into()
    })?;
    for workers in [2, 4] {
        let mut cfg = base.clone();
        cfg.workers = workers;
        ensure(reference == metrics_bytes(&cfg)?, || {
            format!("workers={workers} differs")
        })?;
    }
    Ok(format!(
        "{} identical bytes across 4 runs (workers 1, 1, 2, 4)",
        reference.len()
    ))
}

fn schema_valid(cfg: &ExperimentConfig, metrics: &[RoundMetrics]) -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files = persist_metrics(metrics, cfg, dir.path()).map_err(|e| e.to_string())?;
    let rows = read_metrics_csv(&files.metrics_csv).map_err(|e| e.to_string())?;
    ensure(rows.len() == cfg.rounds, || {
        format!("{} rows for {} rounds", rows.len(), cfg.rounds)
    })?;
    let text = std::fs::read_to_string(&files.summary_json).map_err(|e| e.to_string())?;
    let summary: Summary = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    summary.config.validate().map_err(|e| e.to_string())?;
    ensure(&summary.config == cfg, || {
        "summary does not echo the config".into()
    })
}

fn policy_matrix() -> Outcome {
    let mut ran = Vec::new();
    for triple in PersonalizationPolicy::REFERENCE_SET {
        let mut cfg = smoke();
        cfg.policy.modes = PersonalizationPolicy::try_from(triple).unwrap();
        let run = run_experiment(&cfg).map_err(|e| format!("{triple:?}: {e}"))?;
        schema_valid(&cfg, &run.metrics).map_err(|e| format!("{triple:?}: {e}"))?;
        ran.push(format!("{triple:?}"));
    }
    let mut cfg = smoke();
    cfg.protocol = Protocol::Qfl;
    let run = run_experiment(&cfg).map_err(|e| format!("qfl: {e}"))?;
    schema_valid(&cfg, &run.metrics).map_err(|e| format!("qfl: {e}"))?;
    ran.push("qfl".into());
    Ok(ran.join(" "))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        (
            "communication reduction",
            Duration::from_secs(1),
            communication_reduction,
        ),
        (
            "training-count law",
            Duration::from_secs(120),
            training_count_law,
        ),
        (
            "non-IID direction",
            Duration::from_secs(900),
            non_iid_direction,
        ),
        (
            "learning progress",
            Duration::from_secs(600),
            learning_progress,
        ),
        ("optimizer suite", Duration::from_secs(60), optimizer_suite),
        (
            "quantum-core oracle",
            Duration::from_secs(60),
            quantum_oracle,
        ),
        (
            "pipeline exactness",
            Duration::from_secs(60),
            pipeline_exactness,
        ),
        ("determinism", Duration::from_secs(300), determinism),
        ("policy matrix", Duration::from_secs(600), policy_matrix),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = check();
        let elapsed = t0.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed <= *limit {
                Ok(msg)
            } else {
                Err(format!(
                    "took {:.1}s, limit {}s ({msg})",
                    elapsed.as_secs_f64(),
                    limit.as_secs()
                ))
            }
        });
        match outcome {
            Ok(msg) => println!(
                "PASS  {} {name} [{:.2}s]: {msg}",
                i + 1,
                elapsed.as_secs_f64()
            ),
            Err(msg) => {
                failed += 1;
                println!(
                    "FAIL  {} {name} [{:.2}s]: {msg}",
                    i + 1,
                    elapsed.as_secs_f64()
                );
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
