//! `toxsim` command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::ConfigFile;
use crate::engine;
use crate::error::{Error, Result};
use crate::experiments::{self, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "toxsim", version, about = "Toxic-content diffusion simulator with moderation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write trends, events and a result manifest.
    Simulate(RunArgs),
    /// Run a replicated parameter sweep.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Override `sweep.replications`.
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Parse and range-check a config, then print it with defaults filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed (`sweep.seed_base` for sweeps).
    #[arg(long, env = "TOXSIM_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; results are identical for any value.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_IO: u8 = 2;

fn exit_code(e: &Error) -> u8 {
    if e.is_io() {
        EXIT_IO
    } else {
        EXIT_CONFIG
    }
}

pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Sweep { run, replications } => cmd_sweep(&run, replications),
        Command::Validate { config } => cmd_validate(&config),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn cmd_simulate(args: &RunArgs) -> Result<()> {
    let file = ConfigFile::load(&args.config)?;
    let mut config = file.simulation();
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    config.validate()?;
    let result = pool(args.threads)?.install(|| engine::run(&config))?;

    create_dir(&args.out)?;
    write_file(&args.out.join("trends.csv"), result.trends.to_csv().as_bytes())?;

    let mut events = Vec::new();
    for e in &result.events {
        serde_json::to_writer(&mut events, e).expect("event serializes");
        events.push(b'\n');
    }
    write_file(&args.out.join("events.jsonl"), &events)?;

    let hash = result.trajectory_hash();
    let last = result.trends.counts.last().copied().unwrap_or_default();
    let manifest = json!({
        "config": ConfigFile::from(config),
        "trajectory_hash": hash,
        "trajectory_hash_hex": format!("{hash:016x}"),
        "node_count": result.trends.node_count,
        "iterations": result.trends.len() - 1,
        "final_counts": { "S": last[0], "E": last[1], "I": last[2], "Z": last[3] },
        "interventions": result.intervention_count(),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&args.out.join("result.json"), text.as_bytes())
}

pub fn cmd_sweep(args: &RunArgs, replications: Option<usize>) -> Result<()> {
    let file = ConfigFile::load(&args.config)?;
    let mut section = file.sweep.clone().unwrap_or_default();
    if let Some(seed) = args.seed {
        section.seed_base = seed;
    }
    if let Some(r) = replications {
        section.replications = r;
    }
    let base = file.simulation();
    base.validate()?;
    let spec = SweepSpec::from_config(base, &section)?;
    let cells = pool(args.threads)?.install(|| experiments::run_sweep(&spec))?;

    create_dir(&args.out)?;
    write_file(&args.out.join("aggregate_trends.csv"), experiments::trends_csv(&cells).as_bytes())?;
    write_file(&args.out.join("summary.csv"), experiments::summary_csv(&cells).as_bytes())?;

    let manifest: Vec<_> = spec
        .cells
        .iter()
        .map(|cell| {
            let assignments: serde_json::Map<String, serde_json::Value> = cell
                .assignments
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::to_value(v).expect("toml value to json")))
                .collect();
            json!({
                "cell_id": cell.id,
                "param_assignments": cell.label(),
                "assignments": assignments,
                "replications": spec.replications,
                "seeds": (0..spec.replications).map(|r| spec.seed(r)).collect::<Vec<_>>(),
                "final_window": spec.final_window,
                "config": ConfigFile::from(cell.config.clone()),
            })
        })
        .collect();
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&args.out.join("cells.json"), text.as_bytes())
}

pub fn cmd_validate(path: &Path) -> Result<()> {
    let file = ConfigFile::load(path)?;
    file.validate()?;
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(file.to_toml().as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}
