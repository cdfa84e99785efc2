//! `qlt`: experiment driver for landscape tomography.
//!
//! Every subcommand reads a TOML or JSON config (or the header of an earlier
//! output), writes deterministic CSV/JSON files stamped with the version,
//! seed and config hash, and exits with 0 on success, 2 on a config error and
//! 3 on a failed verification. `QLT_THREADS` caps the worker count.

mod commands;
mod config;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use config::{CliError, CliResult, Output, RunHeader, Seeded};

#[derive(Parser)]
#[command(name = "qlt", version, about = "Landscape tomography experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML or JSON config, or an earlier output file to re-run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Extract an exact environment and run its invariant checks.
    EnvCheck(Common),
    /// Reconstruction error against shots for several estimators.
    TomoBench(Common),
    /// Energy error of the optimal gate of an estimated environment.
    OptgateBench(Common),
    /// Shot overhead of gate sets relative to a 2-design.
    GatesetOverhead(Common),
    /// Greedy search for a Clifford tableau cover.
    CoverSearch(Common),
    /// Gate-by-gate sweeps against the parameterized baselines.
    Vqe(Common),
}

fn prepare<T>(name: &'static str, common: &Common) -> CliResult<(T, Output)>
where
    T: DeserializeOwned + Serialize + Default + Seeded,
{
    let mut cfg: T = config::load(common.config.as_deref())?;
    if let Some(s) = common.seed {
        *cfg.seed_mut() = s;
    }
    let seed = *cfg.seed_mut();
    let header = RunHeader::new(name, seed, &cfg)?;
    let out = Output::create(Path::new(&common.out), header)?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::EnvCheck(c) => {
            let (cfg, out) = prepare("env-check", &c)?;
            commands::env_check(&cfg, &out)
        }
        Command::TomoBench(c) => {
            let (cfg, out) = prepare("tomo-bench", &c)?;
            commands::tomo_bench(&cfg, &out)
        }
        Command::OptgateBench(c) => {
            let (cfg, out) = prepare("optgate-bench", &c)?;
            commands::optgate_bench(&cfg, &out)
        }
        Command::GatesetOverhead(c) => {
            let (cfg, out) = prepare("gateset-overhead", &c)?;
            commands::gateset_overhead(&cfg, &out)
        }
        Command::CoverSearch(c) => {
            let (cfg, out) = prepare("cover-search", &c)?;
            commands::cover_search(&cfg, &out)
        }
        Command::Vqe(c) => {
            let (cfg, out) = prepare("vqe", &c)?;
            commands::vqe(&cfg, &out)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("QLT_THREADS") {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                qlt_core::par::set_global_threads(t);
            }
            _ => {
                eprintln!("{}", CliError::Config(format!("QLT_THREADS={v} is not a positive integer")));
                std::process::exit(2);
            }
        }
    }
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
