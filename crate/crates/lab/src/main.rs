use std::path::PathBuf;
use std::process::ExitCode;

use annealpath_core::annealer::Backend;
use annealpath_lab::config::{ExperimentConfig, Method};
use annealpath_lab::error::{LabError, Result};
use annealpath_lab::workspace::Workspace;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "annealpath",
    version,
    about = "Reverse-anneal and h-gain schedule experiments"
)]
struct Cli {
    /// Experiment configuration (JSON); defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Top-level seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// statevector or classical; overrides the configuration.
    #[arg(long, global = true)]
    backend: Option<Backend>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate training and validation graphs.
    Gen,
    /// Best-of-N forward-anneal baselines for every graph.
    Baseline,
    /// Scan the HG scaling factor alpha1 over 0.01..=1.
    TuneScaling {
        #[arg(long)]
        density: Option<f64>,
    },
    /// Bayesian optimization of a method's schedule.
    TuneSchedule {
        /// RA, HG, RA+HG; defaults to the configured method.
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        density: Option<f64>,
        /// Tune alpha1 (and alpha2) together with the schedule.
        #[arg(long)]
        joint_alpha: bool,
    },
    /// Evaluate all methods on the validation graphs.
    Compare,
    /// Render CSV and SVG files from stored results.
    Export,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(b) = cli.backend {
        cfg.backend = b;
    }
    if let Command::TuneSchedule {
        joint_alpha: true, ..
    } = cli.command
    {
        cfg.joint_alpha = true;
    }
    let ws = Workspace::new(cfg, &cli.out)?;
    match cli.command {
        Command::Gen => {
            let files = ws.gen()?;
            println!(
                "wrote {} instance files to {}",
                files.len(),
                cli.out.display()
            );
        }
        Command::Baseline => {
            let entries = ws.baseline()?;
            let undefined = entries.iter().filter(|e| e.value.is_none()).count();
            println!("{} baselines ({undefined} undefined)", entries.len());
        }
        Command::TuneScaling { density } => {
            for (d, rows) in ws.tune_scaling(density)? {
                if let Some(best) = annealpath_lab::tuning::best_scaling(&rows) {
                    println!(
                        "p={d}: best alpha1={} mean improvement {:.6}",
                        best.alpha1, best.mean_improvement
                    );
                }
            }
        }
        Command::TuneSchedule {
            method, density, ..
        } => {
            let method = method.unwrap_or(ws.cfg.method);
            for s in ws.tune_schedule(method, density)? {
                println!(
                    "{} p={}: start {:.6} -> best {:.6} ({} calls)",
                    s.method, s.density, s.start_value, s.best_value, s.fitness_calls
                );
            }
        }
        Command::Compare => {
            for r in ws.compare()? {
                println!("{},{},{},{}", r.method, r.t, r.density, r.mean_improvement);
            }
        }
        Command::Export => {
            let files = ws.export()?;
            println!("wrote {} files", files.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &LabError) -> u8 {
    e.exit_code() as u8
}
