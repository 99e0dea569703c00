//! `symbio` command line: reproduce the figure datasets or run ad hoc
//! experiments described by a TOML config.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on solver
//! failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use symbio::config::{load_config, ExperimentConfig, Sweep};
use symbio::experiments::{emit_csv, run_experiment};
use symbio::Error;

#[derive(Parser)]
#[command(
    name = "symbio",
    about = "Rate analysis and beamforming for symbiotic radio with backscatter devices",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// TOML experiment config; defaults are used when omitted.
    #[arg(long, value_name = "path")]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; stdout when omitted.
    #[arg(long, value_name = "path")]
    out: Option<PathBuf>,
    /// Comma-separated subset of mrc,corr-eig,sdr.
    #[arg(long, value_delimiter = ',', value_name = "list")]
    methods: Option<Vec<String>>,
    /// Monte Carlo trials per rate evaluation.
    #[arg(long, value_name = "n")]
    trials: Option<u64>,
    /// Independent channel realizations per sweep point.
    #[arg(long, value_name = "n")]
    realizations: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Asymptotic primary rate versus secondary sum rate.
    Fig2(Common),
    /// Primary rate versus transmit power, one channel realization.
    Fig3(Common),
    /// Mean primary rate versus number of BDs.
    Fig4(Common),
    /// Mean secondary sum rate versus number of BDs (same sweep as fig4).
    Fig5(Common),
    /// Run whatever sweep the config declares (default: one realization,
    /// one power point, all requested methods).
    Run(Common),
    /// Parse and validate a config file, reporting any problems.
    ValidateConfig {
        /// TOML experiment config to check.
        #[arg(long, value_name = "path")]
        config: PathBuf,
    },
}

fn build_config(common: &Common, default_sweep: Sweep) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default_for(default_sweep),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(methods) = &common.methods {
        cfg.methods = methods.clone();
    }
    if let Some(trials) = common.trials {
        cfg.mc_trials = trials;
    }
    if let Some(realizations) = common.realizations {
        cfg.n_realizations = realizations;
    }
    if let Some(out) = &common.out {
        cfg.output_path = Some(out.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(common: &Common, sweep: Sweep, pin_sweep: bool) -> Result<(), Error> {
    let cfg = build_config(common, sweep)?;
    if pin_sweep && cfg.sweep != sweep && common.config.is_some() {
        return Err(Error::Config(format!(
            "config declares sweep {:?} but this subcommand runs {:?}",
            cfg.sweep, sweep
        )));
    }
    let table = run_experiment(&cfg)?;
    let path = cfg.output_path.as_ref().map(PathBuf::from);
    emit_csv(&table, path.as_deref())?;
    let failed = table
        .rows
        .iter()
        .filter(|r| r.status == "solver-failed")
        .count();
    if failed > 0 {
        return Err(Error::Solver(format!(
            "{failed} sweep point(s) marked solver-failed in the output"
        )));
    }
    Ok(())
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::Config(_) | Error::Validation(_) => ExitCode::from(2),
        Error::Solver(_) => ExitCode::from(3),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fig2(c) => run(c, Sweep::RsVsRbd, true),
        Command::Fig3(c) => run(c, Sweep::Power, true),
        Command::Fig4(c) | Command::Fig5(c) => run(c, Sweep::BdCount, true),
        Command::Run(c) => run(c, Sweep::Single, false),
        Command::ValidateConfig { config } => load_config(config).map(|cfg| {
            println!("ok: {:?} sweep, {} method(s)", cfg.sweep, cfg.methods.len());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
