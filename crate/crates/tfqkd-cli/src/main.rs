//! Command-line front end: config ingestion, loss scans, model comparison,
//! fluctuation studies, Monte Carlo bound validation and single-point dumps.
//!
//! Exit codes: 0 on success, 1 when a validation run fails its coverage
//! target, 2 for usage or config errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tfqkd::{parse_config, BoundModel, RunConfig};
use tfqkd_cli::{cmd_compare, cmd_fluct, cmd_point, cmd_sandwich, cmd_scan, cmd_validate, ScanSpec};

#[derive(Parser)]
#[command(
    name = "tfqkd",
    about = "Finite-key twin-field QKD secret key rates versus channel loss",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Config file (flat `key = value` lines, `#` comments). Defaults are
    /// used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override any config key, e.g. `--set N=1e13 --set P_d=1e-8`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Worker threads for the scan (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// First loss point in dB.
    #[arg(long, default_value_t = 0.0)]
    start: f64,

    /// Last loss point in dB.
    #[arg(long, default_value_t = 80.0)]
    end: f64,

    /// Loss step in dB.
    #[arg(long, default_value_t = 1.0)]
    step: f64,

    /// Override the config's intensity-fluctuation magnitude.
    #[arg(long)]
    delta_mu: Option<f64>,

    /// Maximize the rate over a (mu_Z, P_Z) grid at every loss point.
    #[arg(long)]
    optimize: bool,

    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Key rate versus loss for one statistical-fluctuation model.
    Scan {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// hoeffding | mult_chernoff | improved_chernoff | azuma
        #[arg(long, default_value = "improved_chernoff")]
        model: BoundModel,
    },
    /// Rates for the three independent-sample models side by side.
    Compare {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Worst-case rate under intensity fluctuations (Azuma intervals).
    Fluct {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Candidate grid points per intensity axis (overrides config).
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Monte Carlo coverage check of one concentration bound.
    Validate {
        /// hoeffding | mult_chernoff | improved_chernoff | azuma
        #[arg(long, default_value = "improved_chernoff")]
        model: BoundModel,
        /// Bernoulli trials per experiment.
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        /// Success probability.
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        /// Failure probability target per side.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// Number of experiments (>= 1000).
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the plain-text report here (stdout either way).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a CSV report here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Brute-force sandwich check of the decoy yield bounds.
    Sandwich {
        /// Random yield matrices to test.
        #[arg(long, default_value_t = 1000)]
        matrices: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Stronger decoy intensity.
        #[arg(long, default_value_t = 0.4)]
        mu_0: f64,
        /// Weaker decoy intensity.
        #[arg(long, default_value_t = 1e-5)]
        mu_1: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Full diagnostic dump of a single loss point.
    Point {
        #[command(flatten)]
        config: ConfigArgs,
        /// Loss in dB.
        #[arg(long)]
        loss: f64,
        /// hoeffding | mult_chernoff | improved_chernoff | azuma
        #[arg(long, default_value = "improved_chernoff")]
        model: BoundModel,
    },
}

fn load_config(args: &ConfigArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    for assignment in &args.sets {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            anyhow::anyhow!("--set expects KEY=VALUE, got '{assignment}'")
        })?;
        cfg.set(key.trim(), value.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn in_pool<T: Send>(jobs: usize, task: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    if jobs == 0 {
        return Ok(task());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| anyhow::anyhow!("cannot build worker pool: {e}"))?;
    Ok(pool.install(task))
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Scan {
            config,
            grid,
            model,
        } => {
            let cfg = load_config(&config)?;
            let spec = ScanSpec {
                loss_start_db: grid.start,
                loss_end_db: grid.end,
                loss_step_db: grid.step,
                model,
                delta_mu: grid.delta_mu,
                optimize: grid.optimize,
            };
            let csv = in_pool(config.jobs, || cmd_scan(&cfg, &spec))??;
            write_or_print(&grid.out, &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { config, grid } => {
            let cfg = load_config(&config)?;
            let spec = ScanSpec {
                loss_start_db: grid.start,
                loss_end_db: grid.end,
                loss_step_db: grid.step,
                model: BoundModel::ImprovedChernoff,
                delta_mu: grid.delta_mu,
                optimize: grid.optimize,
            };
            let csv = in_pool(config.jobs, || cmd_compare(&cfg, &spec))??;
            write_or_print(&grid.out, &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fluct {
            config,
            grid,
            resolution,
        } => {
            let cfg = load_config(&config)?;
            let resolution = resolution.unwrap_or(cfg.fluct_resolution);
            let spec = ScanSpec {
                loss_start_db: grid.start,
                loss_end_db: grid.end,
                loss_step_db: grid.step,
                model: BoundModel::Azuma,
                delta_mu: grid.delta_mu,
                optimize: grid.optimize,
            };
            let csv = in_pool(config.jobs, || cmd_fluct(&cfg, &spec, resolution))??;
            write_or_print(&grid.out, &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate {
            model,
            n,
            p,
            eps,
            trials,
            seed,
            out,
            csv,
        } => {
            let (report, text, csv_text) = cmd_validate(model, n, p, eps, trials, seed)?;
            print!("{text}");
            if let Some(path) = &out {
                fs::write(path, &text)
                    .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
            }
            if let Some(path) = &csv {
                fs::write(path, &csv_text)
                    .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
            }
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Sandwich {
            matrices,
            seed,
            mu_0,
            mu_1,
            out,
            csv,
        } => {
            let (report, text, csv_text) = cmd_sandwich(matrices, seed, mu_0, mu_1)?;
            print!("{text}");
            if let Some(path) = &out {
                fs::write(path, &text)
                    .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
            }
            if let Some(path) = &csv {
                fs::write(path, &csv_text)
                    .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
            }
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Point {
            config,
            loss,
            model,
        } => {
            let cfg = load_config(&config)?;
            let dump = cmd_point(&cfg, loss, model)?;
            print!("{dump}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
