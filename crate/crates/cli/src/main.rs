//! Command-line driver: sweep execution, single points, table export, and
//! config validation, with exit codes scripts can branch on.

use std::io::Write;
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use quenchprobe::harness::{
    export_tables, persist_point, run_point, run_sweep_with, ExperimentConfig, HarnessError,
    PointEvent,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_PARTIAL: u8 = 3;
const EXIT_ENGINE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "quenchprobe",
    version,
    about = "Local-quench spin-chain simulator with linear-readout analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the configured parameter sweep
    Run(RunArgs),
    /// Execute a single parameter value
    Point(PointArgs),
    /// Regenerate tabular artifacts from stored binary grids
    Export(ExportArgs),
    /// Check a config file and print its fingerprint
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config file (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for instance-level parallelism (default: all cores)
    #[arg(long)]
    workers: Option<NonZeroUsize>,
    /// Output directory, overriding the config
    #[arg(long)]
    output: Option<PathBuf>,
    /// Batch seed, overriding the config
    #[arg(long)]
    seed_override: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Skip points whose artifacts verify against an earlier run of the
    /// same config
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Sweep-parameter value to run
    #[arg(long)]
    value: f64,
}

#[derive(Args)]
struct ExportArgs {
    /// Experiment config file (TOML); its output directory is exported
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep output directory (overrides the config's)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Experiment config file (TOML)
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Point(args) => cmd_point(args),
        Command::Export(args) => cmd_export(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn error_exit(err: &HarnessError) -> ExitCode {
    eprintln!("error: {err}");
    let code = if err.is_engine_failure() {
        EXIT_ENGINE
    } else if matches!(err, HarnessError::Config(_)) {
        EXIT_CONFIG
    } else {
        1
    };
    ExitCode::from(code)
}

/// Load, apply flag overrides, validate, and set up the worker pool.
fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig, ExitCode> {
    let mut config = ExperimentConfig::load(&args.config).map_err(|err| {
        eprintln!("error: {err}");
        ExitCode::from(EXIT_CONFIG)
    })?;
    if let Some(dir) = &args.output {
        config.output.directory = dir.clone();
    }
    if let Some(seed) = args.seed_override {
        config.batch.seed = seed;
    }
    config.validate().map_err(|err| {
        eprintln!("error: {err}");
        ExitCode::from(EXIT_CONFIG)
    })?;
    if let Some(workers) = args.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers.get())
            .build_global()
            .ok();
    }
    Ok(config)
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let config = match load_config(&args.common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let dir = config.output.directory.clone();
    let parameter = config.sweep.parameter.clone();
    println!(
        "sweeping {parameter} over {} values -> {}",
        config.sweep.values.len(),
        dir.display()
    );

    let mut point_start = Instant::now();
    let outcome = run_sweep_with(&config, &dir, args.resume, |event| match event {
        PointEvent::Started {
            index,
            total,
            value,
        } => {
            point_start = Instant::now();
            print!("[{}/{total}] {parameter} = {value} ... ", index + 1);
            std::io::stdout().flush().ok();
        }
        PointEvent::Completed {
            r2_mean, resumed, ..
        } => {
            if resumed {
                println!("reused (verified), R2_mean = {r2_mean:.6}");
            } else {
                println!(
                    "R2_mean = {r2_mean:.6} ({:.1} s)",
                    point_start.elapsed().as_secs_f64()
                );
            }
        }
        PointEvent::Failed { error, .. } => println!("FAILED: {error}"),
    });

    match outcome {
        Ok(outcome) => {
            if let Some(dip) = outcome.dip {
                println!(
                    "dip: {parameter} = {} (R2_mean = {:.6}, interior: {})",
                    dip.parameter, dip.r2_mean, dip.interior
                );
            }
            println!(
                "{} completed, {} failed; artifacts in {}",
                outcome.n_completed,
                outcome.n_failed,
                dir.display()
            );
            if outcome.n_failed > 0 {
                ExitCode::from(EXIT_PARTIAL)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => error_exit(&err),
    }
}

fn cmd_point(args: PointArgs) -> ExitCode {
    let config = match load_config(&args.common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let result = run_point(&config, args.value)
        .and_then(|a| persist_point(&config, &a, &config.output.directory).map(|p| (a, p)));
    match result {
        Ok((artifacts, (record, mean))) => {
            let cells = artifacts.r2.n_sites() * artifacts.r2.n_times();
            println!(
                "{} = {}: R2_mean = {mean:.6}, zeroed cells {}/{cells}",
                config.sweep.parameter,
                args.value,
                artifacts.r2.masked_count()
            );
            println!(
                "artifacts in {}",
                config.output.directory.join(record.directory).display()
            );
            ExitCode::SUCCESS
        }
        Err(err) => error_exit(&err),
    }
}

fn cmd_export(args: ExportArgs) -> ExitCode {
    let dir = match (&args.output, &args.config) {
        (Some(dir), _) => dir.clone(),
        (None, Some(path)) => match ExperimentConfig::load(path) {
            Ok(config) => config.output.directory,
            Err(err) => {
                eprintln!("error: {err}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        (None, None) => {
            eprintln!("error: export needs --config or --output");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match export_tables(&dir) {
        Ok(count) => {
            println!("rewrote {count} tables in {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(err) => error_exit(&err),
    }
}

fn cmd_validate(args: ValidateArgs) -> ExitCode {
    let loaded = ExperimentConfig::load(&args.config).and_then(|config| {
        config.validate()?;
        Ok(config)
    });
    match loaded {
        Ok(config) => {
            let first = config.sweep.values[0];
            let model = config
                .resolve_model(first)
                .map(|m| m.describe())
                .unwrap_or_else(|e| format!("unresolvable: {e}"));
            println!("config OK: {}", args.config.display());
            println!("fingerprint: {}", config.fingerprint());
            println!(
                "sweep: {} over {:?}; model at first value: {model}",
                config.sweep.parameter, config.sweep.values
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
