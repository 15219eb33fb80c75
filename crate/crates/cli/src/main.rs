//! Batch front-end for the walking-chain experiments.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use config::Config;
use output::OutDir;

#[derive(Parser, Debug)]
#[command(name = "legchain", version, about = "Walking-chain stability, bifurcation and turning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for sweeps; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// One perturbed walk; writes trace.csv.
    Simulate,
    /// Floquet exponents over a stiffness sweep and critical values.
    Floquet,
    /// Steady joint angles and radius against 1/k1, with the sqrt fit.
    Diagram,
    /// Turning task over a k1 sweep.
    Turning,
    /// Turning task, pitchfork sweep against uniform-stiffness sweep.
    Compare,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Floquet => "floquet",
            Command::Diagram => "diagram",
            Command::Turning => "turning",
            Command::Compare => "compare",
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::from_toml("")?,
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs: must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    let out = OutDir::create(&cli.out, cli.command.name(), &cfg)?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg, &out),
        Command::Floquet => commands::floquet(&cfg, &out),
        Command::Diagram => commands::diagram(&cfg, &out),
        Command::Turning => commands::turning(&cfg, &out),
        Command::Compare => commands::compare(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some runs did not complete; see the status column");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
