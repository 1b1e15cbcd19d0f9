//! `mdqfl` experiment runner.
//!
//! Usage:
//!   mdqfl run --config configs/smoke.toml [--out DIR]
//!   mdqfl compare --a configs/qfl.toml --b configs/mdqfl.toml [--out DIR]
//!   mdqfl report --in out/metrics.csv --out report.svg [--columns a,b]
//!   mdqfl validate-config --config configs/smoke.toml
//!
//! `MDQFL_OUT_DIR` overrides the config's `output_dir` when `--out` is absent.
//! Exit codes: 0 success, 2 configuration error, 3 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mdqfl_core::metrics::{persist_metrics, read_metrics_csv, RoundMetrics, Summary};
use mdqfl_core::report::{render_svg, DEFAULT_COLUMNS};
use mdqfl_core::{run_experiment, Error, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "mdqfl",
    version,
    about = "Clustered quantum federated learning simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write metrics.csv, timings.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run two experiments and print a side-by-side summary.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Also persist both runs under DIR/a and DIR/b.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render metric columns of a metrics.csv as an SVG line chart.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated column names.
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
    },
    /// Parse and validate a config without running it.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } | Error::Load { .. } => 2,
        Error::Context { source, .. } => exit_code(source),
        _ => 3,
    }
}

fn run_one(
    config: &Path,
    out: Option<&Path>,
) -> mdqfl_core::Result<(ExperimentConfig, Vec<RoundMetrics>, PathBuf)> {
    let cfg = ExperimentConfig::from_path(config)?;
    let out_dir = cfg.resolve_output_dir(out);
    let run =
        run_experiment(&cfg).map_err(|e| e.context(format!("running {}", config.display())))?;
    persist_metrics(&run.metrics, &cfg, &out_dir)
        .map_err(|e| e.context(format!("writing {}", out_dir.display())))?;
    Ok((cfg, run.metrics, out_dir))
}

fn print_compare(rows: &[(String, Summary)]) {
    println!(
        "{:<10} {:>6} {:>9} {:>11} {:>12} {:>12} {:>9} {:>9} {:>9}",
        "protocol",
        "rounds",
        "trainings",
        "comm_events",
        "modeled_time",
        "wall_time_s",
        "val_acc",
        "test_acc",
        "dev_acc"
    );
    for (label, s) in rows {
        let last = s.final_round.as_ref();
        let f = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<10} {:>6} {:>9} {:>11} {:>12.2} {:>12.3} {:>9} {:>9} {:>9}",
            label,
            s.rounds,
            s.totals.trainings,
            s.totals.comm_events,
            s.totals.modeled_t_total,
            s.totals.wall_clock_s,
            f(last.map(|m| m.server_val_acc)),
            f(last.map(|m| m.server_test_acc)),
            f(last.map(|m| m.avg_device_test_acc)),
        );
    }
}

fn execute(cli: Cli) -> mdqfl_core::Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let (_, metrics, dir) = run_one(&config, out.as_deref())?;
            println!("{} rounds written to {}", metrics.len(), dir.display());
        }
        Command::Compare { a, b, out } => {
            let mut rows = Vec::new();
            for (tag, path) in [("a", &a), ("b", &b)] {
                let cfg = ExperimentConfig::from_path(path)?;
                let run = run_experiment(&cfg)
                    .map_err(|e| e.context(format!("running {}", path.display())))?;
                if let Some(dir) = &out {
                    persist_metrics(&run.metrics, &cfg, &dir.join(tag))?;
                }
                rows.push((
                    cfg.protocol.name().to_string(),
                    Summary::new(&run.metrics, &cfg),
                ));
            }
            print_compare(&rows);
        }
        Command::Report {
            input,
            out,
            columns,
        } => {
            let metrics = read_metrics_csv(&input)?;
            let cols: Vec<&str> = if columns.is_empty() {
                DEFAULT_COLUMNS.to_vec()
            } else {
                columns.iter().map(String::as_str).collect()
            };
            let title = input.display().to_string();
            std::fs::write(&out, render_svg(&metrics, &cols, &title)?)?;
            println!("wrote {}", out.display());
        }
        Command::ValidateConfig { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            println!(
                "{}: valid ({} protocol, {} devices, {} rounds)",
                config.display(),
                cfg.protocol.name(),
                cfg.n_devices,
                cfg.rounds
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
