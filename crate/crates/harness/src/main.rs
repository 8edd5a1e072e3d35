use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use remnant_harness::config::read_json;
use remnant_harness::tools::{run_control, run_curve, run_simulate};
use remnant_harness::{
    emit_outputs, run_monte_carlo, summarize, ControlConfig, CurveConfig, ExperimentConfig,
    SimulateConfig,
};

#[derive(Parser)]
#[command(
    name = "remnant",
    version,
    about = "Preisach remnant curves and iterative remnant control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a remnant curve and write curve.csv.
    Curve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run one controller and write trace.csv.
    Control {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a Monte Carlo comparison and write histogram, transients and summary.
    Montecarlo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 uses every core).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Drive the relay grid through a time,value CSV and write output.csv.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

/// `Ok(true)` when every controller run converged.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Curve { config, out } => {
            let cfg: CurveConfig = read_json(&config)?;
            let path = run_curve(&cfg, &out)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::Control { config, out } => {
            let cfg: ControlConfig = read_json(&config)?;
            let (trace, path) = run_control(&cfg, &out)?;
            println!(
                "{:?} after {} iterations, final amplitude {:?}; wrote {}",
                trace.termination,
                trace.iterations(),
                trace.final_amplitude(),
                path.display()
            );
            Ok(trace.converged)
        }
        Command::Montecarlo {
            config,
            out,
            seed,
            threads,
        } => {
            let mut cfg: ExperimentConfig = read_json(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let result = run_monte_carlo(&cfg, threads).context("monte carlo run failed")?;
            let paths = emit_outputs(&result, &out)?;
            for m in summarize(&result).methods {
                println!(
                    "{:<20} converged {}/{}  median iterations {:?}",
                    m.method, m.converged, m.runs, m.median_iterations
                );
            }
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(result.all_converged())
        }
        Command::Simulate { config, input, out } => {
            let cfg: SimulateConfig = read_json(&config)?;
            let path = run_simulate(&cfg, &input, &out)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
